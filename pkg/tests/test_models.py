"""Test cases for the CAE, Triamese and CTriamese models."""

import logging
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory
from typing import List

import numpy as np
import pytest

from unsup_speech_features.exceptions import CheckpointError
from unsup_speech_features.exceptions import DataError
from unsup_speech_features.exceptions import NumericError
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.features.sequence import index_sequences
from unsup_speech_features.models.architectures import CaeModel
from unsup_speech_features.models.architectures import CTriameseModel
from unsup_speech_features.models.architectures import Model
from unsup_speech_features.models.architectures import ModelKind
from unsup_speech_features.models.architectures import SpeakerTable
from unsup_speech_features.models.architectures import TriameseModel
from unsup_speech_features.models.checkpoint import ModelCheckpoint
from unsup_speech_features.models.checkpoint import load_checkpoint
from unsup_speech_features.models.checkpoint import save_checkpoint
from unsup_speech_features.models.extraction import extract_archive
from unsup_speech_features.models.extraction import extract_features
from unsup_speech_features.models.gradients import TOY_DIM
from unsup_speech_features.models.gradients import TOY_EMBEDDING
from unsup_speech_features.models.gradients import TOY_HIDDEN
from unsup_speech_features.models.gradients import TOY_SPEAKER_DIM
from unsup_speech_features.models.gradients import TOY_SPEAKERS
from unsup_speech_features.models.gradients import check_all_gradients
from unsup_speech_features.models.gradients import check_gradients
from unsup_speech_features.models.gradients import toy_dataset
from unsup_speech_features.models.gradients import toy_model
from unsup_speech_features.models.losses import batch_objective
from unsup_speech_features.models.losses import cae_batch
from unsup_speech_features.models.losses import cae_loss
from unsup_speech_features.models.losses import cosine_distance
from unsup_speech_features.models.losses import ctriamese_batch
from unsup_speech_features.models.losses import ctriamese_loss
from unsup_speech_features.models.losses import triamese_batch
from unsup_speech_features.models.losses import triplet_loss
from unsup_speech_features.models.training import TrainConfig
from unsup_speech_features.models.training import ValidationSet
from unsup_speech_features.models.training import build_optimizer
from unsup_speech_features.models.training import pretrain
from unsup_speech_features.models.training import train
from unsup_speech_features.neuralnet.optimizers import Adadelta
from unsup_speech_features.pairing.dataset import ItemKind
from unsup_speech_features.pairing.frames import FramePair
from unsup_speech_features.pairing.frames import FrameQuadruplet
from unsup_speech_features.pairing.frames import FrameTriplet
from unsup_speech_features.pairing.segments import WordSegment
from unsup_speech_features.pairing.synthetic import SynthConfig
from unsup_speech_features.pairing.synthetic import generate_synthetic_corpus


def small_ctriamese(dtype: type = np.float32) -> CTriameseModel:
    """Speaker-conditioned CTriamese with tiny layers."""
    cae = CaeModel.create(0, TOY_SPEAKERS, TOY_DIM, TOY_HIDDEN, TOY_EMBEDDING, TOY_SPEAKER_DIM, dtype)
    return CTriameseModel(cae)


def parameters_equal(first: Model, second: Model) -> bool:
    """Whether two models hold identical parameter values."""
    return all(
        np.array_equal(left, right) for left, right in zip(first.parameter_arrays(), second.parameter_arrays())
    )


class TestLosses(unittest.TestCase):
    """Loss identities."""

    def test_triplet_cases(self) -> None:
        """Satisfied, tied and violated triplets with m = 0.15."""
        a, orthogonal = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        self.assertEqual(triplet_loss(a, a, orthogonal, 0.15), 0.0)
        self.assertAlmostEqual(triplet_loss(a, a, a, 0.15), 0.15)
        self.assertAlmostEqual(triplet_loss(a, orthogonal, a, 0.15), 1.15)

    def test_triplet_scale_invariance(self) -> None:
        """Cosine distances ignore the embedding scale."""
        rng = np.random.default_rng(0)
        a, b, n = rng.normal(size=(3, 5))
        self.assertAlmostEqual(triplet_loss(2 * a, 3 * b, 0.5 * n, 0.15), triplet_loss(a, b, n, 0.15))

    def test_cosine_of_zero_vector(self) -> None:
        """Zero vectors are at distance 0 from everything."""
        self.assertEqual(cosine_distance(np.zeros(3), np.ones(3)), 0.0)
        self.assertAlmostEqual(cosine_distance([1.0, 0.0], [-2.0, 0.0]), 2.0)

    def test_identical_inputs_cost_the_margin(self) -> None:
        """When anchor, positive and negative coincide the loss is m."""
        model = toy_model(ModelKind.TRIAMESE, speaker_conditioning=False)
        assert isinstance(model, TriameseModel)
        x = np.random.default_rng(1).normal(size=(3, TOY_DIM))
        self.assertAlmostEqual(triamese_batch(model, x, x, x).loss, model.margin)

    def test_triamese_batch_is_mean_of_items(self) -> None:
        """The batch loss averages per-item triplet losses on the embeddings."""
        model = toy_model(ModelKind.TRIAMESE, speaker_conditioning=False)
        x_a, x_b, x_neg = np.random.default_rng(2).normal(size=(3, 4, TOY_DIM))
        expected = np.mean(
            [
                triplet_loss(model.embed(x_a)[i], model.embed(x_b)[i], model.embed(x_neg)[i], model.margin)
                for i in range(4)
            ]
        )
        assert isinstance(model, TriameseModel)
        self.assertAlmostEqual(triamese_batch(model, x_a, x_b, x_neg).loss, float(expected))

    def test_cae_batch_is_mean_of_items(self) -> None:
        """The batch loss averages per-item squared reconstruction errors."""
        model = toy_model(ModelKind.CAE, speaker_conditioning=False)
        assert isinstance(model, CaeModel)
        x_in, x_out = np.random.default_rng(3).normal(size=(2, 5, TOY_DIM))
        expected = np.mean([cae_loss(model, x_in[i], x_out[i]) for i in range(5)])
        self.assertAlmostEqual(cae_batch(model, x_in, x_out).loss, float(expected))

    def test_ctriamese_decomposes(self) -> None:
        """CTriamese loss is three reconstructions plus the triplet term."""
        model = small_ctriamese(np.float64)
        cae = model.cae
        x_a, x_b, x_neg, x_neg_b = np.random.default_rng(4).normal(size=(4, TOY_DIM)).astype(np.float32)
        neg_word = WordSegment("u", 0, 1, "s2", 1)
        quad = FrameQuadruplet(
            FrameTriplet(FramePair(x_a, x_b, "s0", "s1", 0), x_neg, "s0", 1, neg_word, 0),
            x_neg_b,
            "s2",
            neg_word,
        )
        expected = (
            cae_loss(cae, x_a, x_b, "s1")
            + cae_loss(cae, x_b, x_a, "s0")
            + cae_loss(cae, x_neg, x_neg_b, "s2")
            + triplet_loss(cae.embed(x_a[None])[0], cae.embed(x_b[None])[0], cae.embed(x_neg[None])[0], model.margin)
        )
        self.assertAlmostEqual(ctriamese_loss(model, quad), expected)

        table = cae.speaker_table
        assert table is not None
        rows = (table.lookup(["s0"]), table.lookup(["s1"]), table.lookup(["s2"]))
        batch = ctriamese_batch(model, x_a[None], x_b[None], x_neg[None], x_neg_b[None], rows)
        self.assertAlmostEqual(batch.loss, expected)

    def test_conditioned_cae_needs_speaker(self) -> None:
        """A speaker-conditioned decoder needs the target speaker."""
        model = toy_model(ModelKind.CAE)
        assert isinstance(model, CaeModel)
        with self.assertRaises(DataError):
            cae_loss(model, np.zeros(TOY_DIM), np.zeros(TOY_DIM))
        with self.assertRaises(DataError):
            cae_loss(model, np.zeros(TOY_DIM), np.zeros(TOY_DIM), "nobody")

    def test_batch_kind_mismatch(self) -> None:
        """Models refuse items of another kind."""
        with self.assertRaises(DataError):
            batch_objective(toy_model(ModelKind.TRIAMESE), toy_dataset(ModelKind.CAE))


class TestGradients(unittest.TestCase):
    """Finite-difference checks of every objective."""

    def test_every_kind_conditioned(self) -> None:
        """All objectives pass with speaker conditioning where it applies."""
        for kind in ModelKind:
            with self.subTest(kind=kind.value):
                result = check_gradients(kind, seed=0)
                self.assertTrue(result.passed, result)
                self.assertGreater(result.n_checked, 0)

    def test_every_kind_unconditioned(self) -> None:
        """All objectives pass without speaker vectors."""
        for kind in ModelKind:
            with self.subTest(kind=kind.value):
                result = check_gradients(kind, seed=1, speaker_conditioning=False)
                self.assertLess(result.max_relative_error, 1e-4)

    def test_check_all(self) -> None:
        """The combined check covers every kind."""
        results = check_all_gradients(seed=2)
        self.assertEqual(sorted(results), ["cae", "ctriamese", "triamese"])
        self.assertTrue(all(result.passed for result in results.values()))


class TestArchitectures(unittest.TestCase):
    """Model construction and weight tying."""

    def test_cae_layout(self) -> None:
        """Six 100-unit layers to a linear 39-unit bottleneck, mirrored back."""
        model = CaeModel.create(0, ["a", "b"])
        self.assertEqual(model.encoder_spec.layer_sizes, (39,) + (100,) * 6 + (39,))
        self.assertEqual(model.encoder_spec.activations[-1], "linear")
        self.assertEqual(model.decoder_spec.layer_sizes, (139,) + (100,) * 6 + (39,))
        assert model.speaker_table is not None
        self.assertEqual(model.speaker_table.vectors.shape, (2, 100))

    def test_triamese_presets(self) -> None:
        """The wide preset uses four 1000-unit layers and a 100-unit ReLU embedding."""
        wide = TriameseModel.create(0, preset="100")
        self.assertEqual(wide.branch_spec.layer_sizes, (39, 1000, 1000, 1000, 1000, 100))
        self.assertEqual(set(wide.branch_spec.activations), {"relu"})
        self.assertEqual(TriameseModel.create(0).embedding_dim, 39)
        with self.assertRaises(ValueError):
            TriameseModel.create(0, preset="7")

    def test_invalid_margin(self) -> None:
        """Margins must lie strictly between 0 and 2."""
        with self.assertRaises(ValueError):
            TriameseModel.create(0, margin=0.0)
        with self.assertRaises(ValueError):
            CTriameseModel.create(0, margin=2.0)

    def test_decoder_width_checked(self) -> None:
        """A decoder must take the bottleneck plus the speaker vector."""
        plain = CaeModel.create(0, None, TOY_DIM, TOY_HIDDEN, TOY_EMBEDDING)
        table = SpeakerTable.create(["a"], TOY_SPEAKER_DIM, seed=0)
        with self.assertRaises(ValueError):
            CaeModel(plain.encoder_spec, plain.decoder_spec, plain.encoder, plain.decoder, table)

    def test_unknown_speaker(self) -> None:
        """Speaker lookups name the missing speaker."""
        table = SpeakerTable.create(["a", "b"], 3, seed=0)
        np.testing.assert_array_equal(table.lookup(["b", "a"]), [1, 0])
        with self.assertRaisesRegex(DataError, "'c'"):
            table.lookup(["a", "c"])

    def test_weights_are_tied(self) -> None:
        """All branches share one parameter set, before and after training."""
        triamese = toy_model(ModelKind.TRIAMESE, speaker_conditioning=False)
        assert isinstance(triamese, TriameseModel)
        first, second, third = triamese.branches()
        self.assertIs(first, second)
        self.assertIs(second, third)

        ctriamese = small_ctriamese()
        self.assertTrue(all(branch is ctriamese.cae for branch in ctriamese.branches()))
        config = TrainConfig(model=ModelKind.CTRIAMESE, epochs=1, batch_size=2, speaker_conditioning=True)
        result = train(toy_dataset(ModelKind.CTRIAMESE), config, model=ctriamese)
        trained = result.checkpoint.model
        assert isinstance(trained, CTriameseModel)
        self.assertTrue(all(branch is trained.cae for branch in trained.branches()))
        self.assertEqual(len(trained.parameter_arrays()), len(trained.cae.parameter_arrays()))


class ScriptedValidation(ValidationSet):
    """Validation set that replays fixed AP values."""

    def __init__(self, scores: List[float]) -> None:
        """No words; scores are returned in order."""
        super().__init__([], {})
        self.scores = list(scores)

    def score(self, model: Model) -> float:
        """Next scripted AP."""
        return self.scores.pop(0)


class TestTraining(unittest.TestCase):
    """Training loops."""

    def test_is_deterministic(self) -> None:
        """Same data and seed give identical parameters."""
        config = TrainConfig(model=ModelKind.CAE, epochs=2, batch_size=2, seed=3)
        first = train(toy_dataset(ModelKind.CAE), config)
        second = train(toy_dataset(ModelKind.CAE), config)
        self.assertTrue(parameters_equal(first.checkpoint.model, second.checkpoint.model))
        self.assertEqual([r.loss for r in first.history], [r.loss for r in second.history])

    def test_seed_matters(self) -> None:
        """Another seed gives another model."""
        first = train(toy_dataset(ModelKind.TRIAMESE), TrainConfig(model=ModelKind.TRIAMESE, epochs=1, seed=0))
        second = train(toy_dataset(ModelKind.TRIAMESE), TrainConfig(model=ModelKind.TRIAMESE, epochs=1, seed=1))
        self.assertFalse(parameters_equal(first.checkpoint.model, second.checkpoint.model))

    def test_keeps_last_epoch_without_validation(self) -> None:
        """Without validation every epoch runs and the last one is kept."""
        result = train(toy_dataset(ModelKind.CAE), TrainConfig(model=ModelKind.CAE, epochs=3, batch_size=3))
        self.assertEqual([record.epoch for record in result.history], [1, 2, 3])
        self.assertEqual(result.best_epoch, 3)
        self.assertFalse(result.stopped_early)
        self.assertTrue(all(record.val_ap is None for record in result.history))
        self.assertTrue(all(np.isfinite(record.loss) for record in result.history))

    def test_early_stopping_keeps_best_epoch(self) -> None:
        """Training stops after `patience` epochs without gain and returns the best model."""
        config = TrainConfig(model=ModelKind.CAE, epochs=10, batch_size=2, seed=5, patience=2)
        result = train(toy_dataset(ModelKind.CAE), config, ScriptedValidation([0.5, 0.6, 0.55, 0.6, 0.9]))
        self.assertTrue(result.stopped_early)
        self.assertEqual(len(result.history), 4)
        self.assertEqual(result.best_epoch, 2)
        self.assertEqual(result.history[1].val_ap, 0.6)

        reference = train(toy_dataset(ModelKind.CAE), TrainConfig(model=ModelKind.CAE, epochs=2, batch_size=2, seed=5))
        self.assertTrue(parameters_equal(result.checkpoint.model, reference.checkpoint.model))

    def test_autoencoding_loss_never_increases(self) -> None:
        """With targets equal to inputs the epoch loss does not go up, for five seeds."""
        for seed in range(5):
            dataset = toy_dataset(ModelKind.CAE, n_items=16, seed=seed)
            dataset.x_b = dataset.x_a.copy()
            model = toy_model(ModelKind.CAE, seed, speaker_conditioning=False)
            # one full batch per epoch, so every epoch loss is the loss before its step
            config = TrainConfig(model=ModelKind.CAE, epochs=5, batch_size=16, seed=seed)
            losses = [record.loss for record in train(dataset, config, model=model).history]
            self.assertEqual(len(losses), 5)
            for earlier, later in zip(losses, losses[1:]):
                self.assertLessEqual(later, earlier)

    def test_validation_scores_words(self) -> None:
        """Real validation sets score the model's features with AP."""
        corpus = generate_synthetic_corpus(
            SynthConfig(n_types=2, n_speakers=1, n_eval_speakers=1, words_per_speaker_per_type=2,
                        frames_range=(4, 6), dim=TOY_DIM)
        )
        validation = ValidationSet(corpus.eval_words, index_sequences(corpus.features))
        score = validation.score(toy_model(ModelKind.CAE, speaker_conditioning=False))
        self.assertTrue(0.0 <= score <= 1.0)

    def test_empty_dataset(self) -> None:
        """Nothing to train on is a data error."""
        empty = toy_dataset(ModelKind.CAE).take(np.array([], dtype=np.int64))
        with self.assertRaisesRegex(DataError, "empty training set"):
            train(empty, TrainConfig(model=ModelKind.CAE))

    def test_kind_mismatch(self) -> None:
        """Models only train on their own item kind."""
        with self.assertRaises(DataError):
            train(toy_dataset(ModelKind.CAE), TrainConfig(model=ModelKind.TRIAMESE))

    def test_speaker_table_mismatch(self) -> None:
        """A supplied model must know the dataset's speakers."""
        model = CaeModel.create(0, ["x", "y"], TOY_DIM, TOY_HIDDEN, TOY_EMBEDDING, TOY_SPEAKER_DIM)
        config = TrainConfig(model=ModelKind.CAE, speaker_conditioning=True)
        with self.assertRaises(DataError):
            train(toy_dataset(ModelKind.CAE), config, model=model)

    def test_non_finite_loss(self) -> None:
        """Diverging training raises a numeric error."""
        dataset = toy_dataset(ModelKind.CAE)
        dataset.x_b = dataset.x_b * np.float32(1e30)
        with np.errstate(all="ignore"), self.assertRaises(NumericError):
            train(dataset, TrainConfig(model=ModelKind.CAE, epochs=1))

    def test_pretraining(self) -> None:
        """Pretraining runs for CAE-based models and is skipped for Triamese."""
        config = TrainConfig(model=ModelKind.CTRIAMESE, pretrain_epochs=2, speaker_conditioning=True, batch_size=4)
        rng = np.random.default_rng(0)
        losses = pretrain(small_ctriamese(), toy_dataset(ModelKind.CTRIAMESE), config, rng)
        self.assertEqual(len(losses), 2)
        self.assertTrue(all(np.isfinite(losses)))

        triamese = toy_model(ModelKind.TRIAMESE, speaker_conditioning=False)
        triamese_config = TrainConfig(model=ModelKind.TRIAMESE, pretrain_epochs=1)
        self.assertEqual(pretrain(triamese, toy_dataset(ModelKind.TRIAMESE), triamese_config, rng), [])

    def test_optimizer_choice(self) -> None:
        """Adadelta for CAE-based models, SGD for Triamese, with an optional rate override."""
        cae = toy_model(ModelKind.CAE, speaker_conditioning=False)
        self.assertEqual(build_optimizer(TrainConfig(model=ModelKind.CAE), cae).kind, "adadelta")
        self.assertEqual(build_optimizer(TrainConfig(model=ModelKind.CAE), cae).learning_rate, 0.001)
        overridden = build_optimizer(TrainConfig(model=ModelKind.CAE, learning_rate=0.5), cae)
        self.assertEqual(overridden.learning_rate, 0.5)
        triamese = toy_model(ModelKind.TRIAMESE)
        self.assertEqual(build_optimizer(TrainConfig(model=ModelKind.TRIAMESE), triamese).kind, "sgd")

    def test_config_validation(self) -> None:
        """Invalid combinations are rejected up front."""
        with self.assertRaises(ValueError):
            TrainConfig(model=ModelKind.TRIAMESE, speaker_conditioning=True)
        with self.assertRaises(ValueError):
            TrainConfig(model=ModelKind.CAE, margin=2.0)
        with self.assertRaises(ValueError):
            TrainConfig(model=ModelKind.CAE, epochs=0)
        self.assertEqual(TrainConfig(model=ModelKind.CAE).to_dict()["model"], "cae")
        self.assertNotEqual(TrainConfig(model=ModelKind.CAE).digest, TrainConfig(model=ModelKind.CAE, seed=1).digest)


class TestCheckpoints(unittest.TestCase):
    """Checkpoint storage."""

    def setUp(self) -> None:
        """A CTriamese model with one Adadelta step of optimizer state."""
        self.model = small_ctriamese()
        self.optimizer = Adadelta(self.model.parameter_arrays())
        gradients = batch_objective(self.model, toy_dataset(ModelKind.CTRIAMESE)).gradients
        self.optimizer.step(self.model.parameter_arrays(), gradients)
        self.checkpoint = ModelCheckpoint(self.model, self.optimizer, 3, 7, {"model": "ctriamese", "epochs": 3})
        self.tmpdir = TemporaryDirectory()
        self.path = Path(self.tmpdir.name) / "model.zrc"
        save_checkpoint(self.checkpoint, self.path)

    def tearDown(self) -> None:
        """Remove the checkpoint."""
        self.tmpdir.cleanup()

    def test_everything_is_restored(self) -> None:
        """Parameters, speakers, optimizer state and counters come back."""
        loaded = load_checkpoint(self.path, expected_kind=ModelKind.CTRIAMESE)
        self.assertIs(loaded.kind, ModelKind.CTRIAMESE)
        self.assertEqual((loaded.epoch, loaded.seed), (3, 7))
        self.assertEqual(loaded.config, {"model": "ctriamese", "epochs": 3})
        self.assertEqual(loaded.digest, self.checkpoint.digest)
        self.assertTrue(parameters_equal(loaded.model, self.model))
        assert isinstance(loaded.model, CTriameseModel)
        assert loaded.model.cae.speaker_table is not None
        self.assertEqual(loaded.model.cae.speaker_table.speakers, list(TOY_SPEAKERS))
        self.assertEqual(loaded.model.margin, self.model.margin)
        assert loaded.optimizer is not None
        self.assertEqual(loaded.optimizer.hyperparameters(), self.optimizer.hyperparameters())
        for left, right in zip(loaded.optimizer.state_arrays(), self.optimizer.state_arrays()):
            np.testing.assert_array_equal(left, right)

    def test_triamese_without_optimizer(self) -> None:
        """Checkpoints without optimizer state load with none."""
        model = toy_model(ModelKind.TRIAMESE, speaker_conditioning=False).astype(np.float32)
        save_checkpoint(ModelCheckpoint(model), self.path)
        loaded = load_checkpoint(self.path)
        self.assertIsNone(loaded.optimizer)
        self.assertTrue(parameters_equal(loaded.model, model))

    def test_kind_mismatch(self) -> None:
        """Asking for another kind is an error."""
        with self.assertRaisesRegex(CheckpointError, "expected triamese"):
            load_checkpoint(self.path, expected_kind=ModelKind.TRIAMESE)

    def test_truncated(self) -> None:
        """Short files are rejected."""
        self.path.write_bytes(self.path.read_bytes()[:-10])
        with self.assertRaisesRegex(CheckpointError, "truncated"):
            load_checkpoint(self.path)

    def test_trailing_bytes(self) -> None:
        """Extra bytes are rejected."""
        self.path.write_bytes(self.path.read_bytes() + b"\x00")
        with self.assertRaises(CheckpointError):
            load_checkpoint(self.path)

    def test_not_a_checkpoint(self) -> None:
        """Foreign files are rejected."""
        self.path.write_bytes(b"ZRFA1\x00 not a model")
        with self.assertRaisesRegex(CheckpointError, "not a checkpoint"):
            load_checkpoint(self.path)


def test_digest_mismatch_warns(tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
    """A differing config digest loads with a warning."""
    path = tmp_path / "model.zrc"
    checkpoint = ModelCheckpoint(small_ctriamese(), config={"seed": 1})
    save_checkpoint(checkpoint, path)
    with caplog.at_level(logging.WARNING):
        load_checkpoint(path, expected_digest=checkpoint.digest ^ 1)
    assert "differs from expected" in caplog.text


class TestExtraction(unittest.TestCase):
    """Feature extraction."""

    def setUp(self) -> None:
        """Two random utterances."""
        rng = np.random.default_rng(6)
        self.sequences = [
            FeatureSequence("u1", rng.normal(size=(5, TOY_DIM)).astype(np.float32)),
            FeatureSequence("u2", rng.normal(size=(3, TOY_DIM)).astype(np.float32)),
        ]

    def test_embeds_every_frame(self) -> None:
        """Each frame maps to one embedding."""
        model = toy_model(ModelKind.TRIAMESE, speaker_conditioning=False)
        extracted = extract_features(model, self.sequences[0])
        self.assertEqual(extracted.frames.shape, (5, TOY_EMBEDDING))
        self.assertEqual(extracted.utterance_id, "u1")
        expected = model.embed(self.sequences[0].frames.astype(np.float64)).astype(np.float32)
        np.testing.assert_array_equal(extracted.frames, expected)

    def test_speaker_vectors_are_not_used(self) -> None:
        """Features of a conditioned CAE do not depend on its speaker table."""
        model = toy_model(ModelKind.CAE)
        assert isinstance(model, CaeModel) and model.speaker_table is not None
        before = extract_features(model, self.sequences[0]).frames
        model.speaker_table.vectors[...] = 0.0
        np.testing.assert_array_equal(extract_features(model, self.sequences[0]).frames, before)

    def test_archive_order_and_checkpoints(self) -> None:
        """Archives keep their order; checkpoints work as sources."""
        checkpoint = ModelCheckpoint(small_ctriamese())
        extracted = extract_archive(checkpoint, self.sequences)
        self.assertEqual([seq.utterance_id for seq in extracted], ["u1", "u2"])
        self.assertEqual(extracted[1].dim, TOY_EMBEDDING)

    def test_worker_count_does_not_change_output(self) -> None:
        """Extraction in worker processes matches the serial result bit for bit."""
        checkpoint = ModelCheckpoint(small_ctriamese())
        serial = extract_archive(checkpoint, self.sequences)
        parallel = extract_archive(checkpoint, self.sequences, threads=2)
        self.assertEqual([seq.utterance_id for seq in parallel], ["u1", "u2"])
        for left, right in zip(serial, parallel):
            np.testing.assert_array_equal(left.frames, right.frames)

    def test_dimension_mismatch(self) -> None:
        """Frames must have the model's input width."""
        wide = FeatureSequence("w", np.zeros((2, TOY_DIM + 1), dtype=np.float32))
        with self.assertRaises(DataError):
            extract_features(toy_model(ModelKind.CAE), wide)

    def test_item_kinds(self) -> None:
        """Each model consumes one item kind."""
        self.assertIs(ModelKind.CAE.item_kind, ItemKind.PAIRS)
        self.assertIs(ModelKind.TRIAMESE.item_kind, ItemKind.TRIPLETS)
        self.assertIs(ModelKind.CTRIAMESE.item_kind, ItemKind.QUADRUPLETS)


if __name__ == "__main__":
    unittest.main()

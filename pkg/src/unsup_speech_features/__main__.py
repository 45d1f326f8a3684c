"""Command-line interface."""
import csv
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import click
from dotenv import load_dotenv
from halo import Halo  # type: ignore

from unsup_speech_features.config import BATCH_SIZE
from unsup_speech_features.config import FEATURE_DIM
from unsup_speech_features.config import GRADCHECK_TOLERANCE
from unsup_speech_features.config import MARGIN
from unsup_speech_features.config import METRICS
from unsup_speech_features.config import PATIENCE
from unsup_speech_features.config import THREADS_ENV
from unsup_speech_features.exceptions import DataError
from unsup_speech_features.exceptions import NumericError
from unsup_speech_features.exceptions import ZeroResourceError
from unsup_speech_features.evaluation.abx import abx_error
from unsup_speech_features.evaluation.items import load_abx_list
from unsup_speech_features.evaluation.items import load_word_list
from unsup_speech_features.evaluation.report import EvalConfig
from unsup_speech_features.evaluation.report import emit_pr_curve
from unsup_speech_features.evaluation.report import format_report
from unsup_speech_features.evaluation.samediff import same_different_ap
from unsup_speech_features.experiment import VARIANTS
from unsup_speech_features.experiment import ExperimentConfig
from unsup_speech_features.experiment import run_experiment
from unsup_speech_features.features.archive import read_archive
from unsup_speech_features.features.archive import write_archive
from unsup_speech_features.features.mfcc import compute_mfcc
from unsup_speech_features.features.mfcc import read_wav
from unsup_speech_features.features.normalization import CMVN_MODES
from unsup_speech_features.features.normalization import add_deltas
from unsup_speech_features.features.normalization import apply_cmvn
from unsup_speech_features.features.sequence import FeatureSequence
from unsup_speech_features.features.sequence import SpeakerMap
from unsup_speech_features.features.sequence import index_sequences
from unsup_speech_features.models.architectures import TRIAMESE_PRESETS
from unsup_speech_features.models.architectures import ModelKind
from unsup_speech_features.models.checkpoint import load_checkpoint
from unsup_speech_features.models.checkpoint import save_checkpoint
from unsup_speech_features.models.extraction import extract_archive
from unsup_speech_features.models.gradients import check_gradients
from unsup_speech_features.models.training import TrainConfig
from unsup_speech_features.models.training import ValidationSet
from unsup_speech_features.models.training import train as train_model
from unsup_speech_features.pairing.dataset import ItemKind
from unsup_speech_features.pairing.dataset import TrainingSet
from unsup_speech_features.pairing.frames import build_frame_pairs
from unsup_speech_features.pairing.frames import sample_quadruplets
from unsup_speech_features.pairing.frames import sample_triplets
from unsup_speech_features.pairing.segments import load_pair_list
from unsup_speech_features.pairing.segments import unique_segments
from unsup_speech_features.pairing.synthetic import SynthConfig
from unsup_speech_features.pairing.synthetic import generate_synthetic_corpus
from unsup_speech_features.pairing.synthetic import write_corpus
from unsup_speech_features.utils import RunConfig
from unsup_speech_features.utils import parallel_map
from unsup_speech_features.utils import read_manifest
from unsup_speech_features.utils import save_json


logger = logging.getLogger(__name__)

PROG_NAME = "unsup-speech-features"


class PipelineGroup(click.Group):
    """Click group that maps toolkit errors to exit codes.

    0 success, 1 usage error, 2 data error, 3 numeric failure.
    """

    def main(  # type: ignore[override]
        self,
        args: Optional[Sequence[str]] = None,
        prog_name: Optional[str] = None,
        complete_var: Optional[str] = None,
        standalone_mode: bool = True,
        **extra: Any,
    ) -> Any:
        """Run the CLI, exiting with the toolkit's exit codes."""
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, False, **extra)
        try:
            result = super().main(args, prog_name, complete_var, False, **extra)
        except click.UsageError as err:
            err.show()
            sys.exit(1)
        except click.ClickException as err:
            err.show()
            sys.exit(err.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        except ZeroResourceError as err:
            click.echo(f"Error: {err}", err=True)
            sys.exit(err.exit_code)
        except ValueError as err:
            click.echo(f"Error: {err}", err=True)
            sys.exit(2)
        sys.exit(result if isinstance(result, int) else 0)


def spinner(text: str) -> Halo:
    """Spinner on stderr, silent when stderr is not a terminal."""
    return Halo(text=text, spinner="moon", stream=sys.stderr, enabled=sys.stderr.isatty())


def threads_option(function: Callable[..., Any]) -> Callable[..., Any]:
    """Add the shared ``--threads`` option."""
    return click.option(
        "--threads",
        type=click.IntRange(min=1),
        default=1,
        show_default=True,
        envvar=THREADS_ENV,
        help=f"Worker processes (default from ${THREADS_ENV}); results do not depend on it.",
    )(function)


def echo_run(run: RunConfig, output: Optional[Path] = None, summary: Optional[Dict[str, Any]] = None) -> None:
    """Write the manifest next to ``output`` and echo the config digest."""
    logger.debug("Effective config: %s", run.to_dict())
    if output is not None:
        manifest = run.write_manifest(output, summary)
        logger.info("Wrote manifest %s", manifest)
    click.echo(f"config digest: {run.digest}")


@click.group(cls=PipelineGroup)
@click.version_option()
@click.option("--verbose", "-v", is_flag=True, help="Log debug messages.")
def cli(verbose: bool) -> None:
    """Unsupervised speech features.

    Featurize audio, turn discovered word pairs into frame-level training
    items, train CAE, Triamese or CTriamese networks, extract features and
    evaluate them with same-different AP and ABX.
    """
    load_dotenv()
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _wav_paths(inputs: Path) -> List[Path]:
    if inputs.is_dir():
        paths = sorted(inputs.glob("*.wav"))
    else:
        with open(inputs, encoding="utf-8") as file:
            lines = [line.strip() for line in file if line.strip() and not line.startswith("#")]
        paths = [path if path.is_absolute() else inputs.parent / path for path in map(Path, lines)]
    if not paths:
        raise DataError(f"{inputs}: no WAV files found")
    return paths


def _mfcc_task(path: Path) -> FeatureSequence:
    samples, sample_rate_hz = read_wav(path)
    return compute_mfcc(samples, sample_rate_hz, path.stem)


@cli.command()
@click.argument("inputs", type=click.Path(exists=True, path_type=Path))
@click.option("--speakers", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True,
              help="utterance<TAB>speaker map.")
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="Output feature archive.")
@click.option("--cmvn-mode", type=click.Choice(CMVN_MODES), default="speaker", show_default=True)
@threads_option
def featurize(inputs: Path, speakers: Path, out: Path, cmvn_mode: str, threads: int) -> None:
    """MFCC + CMVN + deltas for a WAV directory or a list of WAV paths."""
    run = RunConfig(
        "featurize", {"inputs": str(inputs), "speakers": str(speakers), "out": str(out), "cmvn_mode": cmvn_mode}
    )
    paths = _wav_paths(inputs)
    speaker_map = SpeakerMap.load(speakers)
    with spinner(f"Featurizing {len(paths)} files..."):
        cepstra = parallel_map(_mfcc_task, paths, threads)
        features = [add_deltas(seq) for seq in apply_cmvn(cepstra, speaker_map, cmvn_mode)]
        write_archive(features, out)
    click.echo(f"wrote {len(features)} records to {out}")
    echo_run(run, out, {"records": len(features)})


@cli.command()
@click.argument("archive", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("pair_list", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--speakers", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True,
              help="utterance<TAB>speaker map.")
@click.option("--model", "model_kind", type=click.Choice([kind.value for kind in ModelKind]), default="cae",
              show_default=True, help="Which items to build: pairs, triplets or quadruplets.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--metric", type=click.Choice(METRICS), default="cosine", show_default=True)
@threads_option
def pairs(
    archive: Path, pair_list: Path, out: Path, speakers: Path, model_kind: str, seed: int, metric: str, threads: int
) -> None:
    """Build a frame-level training set from discovered word pairs."""
    kind = ModelKind(model_kind)
    run = RunConfig(
        "pairs",
        {"archive": str(archive), "pair_list": str(pair_list), "speakers": str(speakers), "out": str(out),
         "model": kind.value, "seed": seed, "metric": metric},
    )
    features = index_sequences(read_archive(archive))
    discovered = load_pair_list(pair_list, SpeakerMap.load(speakers), features)
    with spinner("Aligning word pairs..."):
        frame_pairs = build_frame_pairs(discovered, features, metric, threads)
        items: Sequence[object] = frame_pairs
        drops = {"triplets": 0, "quadruplets": 0}
        if kind.item_kind is not ItemKind.PAIRS:
            segments = unique_segments(discovered)
            triplets, triplet_drops = sample_triplets(frame_pairs, segments, features, seed)
            drops["triplets"] = triplet_drops.dropped
            items = triplets
            if kind.item_kind is ItemKind.QUADRUPLETS:
                quadruplets, quadruplet_drops = sample_quadruplets(triplets, segments, features, seed, metric)
                drops["quadruplets"] = quadruplet_drops.dropped
                items = quadruplets
        dim = next(iter(features.values())).dim if features else FEATURE_DIM
        dataset = TrainingSet.from_items(items, kind.item_kind, drops, dim)
        dataset.save(out)

    if len(dataset) == 0:
        logger.warning("No %s could be built; the dataset is empty", kind.item_kind.value)
    click.echo(
        f"{kind.item_kind.value}: {len(dataset)} "
        f"(frame pairs {len(frame_pairs)}, dropped: triplets {drops['triplets']}, "
        f"quadruplets {drops['quadruplets']})"
    )
    echo_run(run, out, {"items": len(dataset), "frame_pairs": len(frame_pairs), "dropped": drops})


def _write_log(path: Path, history: Sequence[Any], with_ap: bool) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["epoch", "loss", "val_ap"] if with_ap else ["epoch", "loss"])
        for record in history:
            row = [record.epoch, repr(record.loss)]
            if with_ap:
                row.append(repr(record.val_ap))
            writer.writerow(row)


@cli.command()
@click.argument("dataset_path", metavar="DATASET", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--model", "model_kind", type=click.Choice([kind.value for kind in ModelKind]), required=True)
@click.option("--epochs", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--batch-size", type=click.IntRange(min=1), default=BATCH_SIZE, show_default=True)
@click.option("--margin", type=click.FloatRange(0.0, 2.0, min_open=True, max_open=True), default=MARGIN,
              show_default=True)
@click.option("--speaker-conditioning", is_flag=True, help="Feed speaker vectors to the decoder.")
@click.option("--triamese-preset", type=click.Choice(TRIAMESE_PRESETS), default="39", show_default=True)
@click.option("--pretrain-epochs", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--patience", type=click.IntRange(min=1), default=PATIENCE, show_default=True)
@click.option("--learning-rate", type=click.FloatRange(0.0, min_open=True), default=None,
              help="Override the optimizer's default rate.")
@click.option("--val-words", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Word list for early stopping on same-different AP.")
@click.option("--val-archive", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Feature archive holding the validation words.")
@click.option("--log-csv", type=click.Path(dir_okay=False, path_type=Path),
              help="Per-epoch log (default: OUT.log.csv).")
@threads_option
def train(
    dataset_path: Path,
    out: Path,
    model_kind: str,
    epochs: int,
    seed: int,
    batch_size: int,
    margin: float,
    speaker_conditioning: bool,
    triamese_preset: str,
    pretrain_epochs: int,
    patience: int,
    learning_rate: Optional[float],
    val_words: Optional[Path],
    val_archive: Optional[Path],
    log_csv: Optional[Path],
    threads: int,
) -> None:
    """Train a model and write its checkpoint plus a per-epoch log."""
    if (val_words is None) != (val_archive is None):
        raise click.UsageError("--val-words and --val-archive must be given together")
    config = TrainConfig(
        model=ModelKind(model_kind),
        epochs=epochs,
        batch_size=batch_size,
        seed=seed,
        margin=margin,
        speaker_conditioning=speaker_conditioning,
        patience=patience,
        triamese_preset=triamese_preset,
        pretrain_epochs=pretrain_epochs,
        learning_rate=learning_rate,
    )
    run = RunConfig(
        "train",
        dict(config.to_dict(), dataset=str(dataset_path), out=str(out),
             val_words=None if val_words is None else str(val_words),
             val_archive=None if val_archive is None else str(val_archive)),
    )
    dataset = TrainingSet.load(dataset_path)
    if dataset.kind is not config.model.item_kind:
        raise DataError(
            f"{config.model.value} trains on {config.model.item_kind.value}, {dataset_path} holds {dataset.kind.value}"
        )
    validation = None
    if val_words is not None and val_archive is not None:
        val_features = index_sequences(read_archive(val_archive))
        validation = ValidationSet(load_word_list(val_words, val_features), val_features, EvalConfig(threads=threads))

    with spinner(f"Training {config.model.value}..."):
        result = train_model(dataset, config, validation)
        save_checkpoint(result.checkpoint, out)
    log_path = log_csv or out.with_name(out.name + ".log.csv")
    _write_log(log_path, result.history, validation is not None)

    final = result.history[-1]
    click.echo(f"trained {len(result.history)} epochs, final loss {final.loss:.6f}")
    if result.stopped_early:
        click.echo(f"stopped early; kept epoch {result.best_epoch}")
    echo_run(run, out, {"epochs_run": len(result.history), "best_epoch": result.best_epoch,
                        "stopped_early": result.stopped_early, "checkpoint_digest": result.checkpoint.digest})


@cli.command()
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("archive", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("out", type=click.Path(dir_okay=False, path_type=Path))
@threads_option
def extract(checkpoint: Path, archive: Path, out: Path, threads: int) -> None:
    """Map every frame of an archive through a trained network."""
    run = RunConfig("extract", {"checkpoint": str(checkpoint), "archive": str(archive), "out": str(out)})
    manifest = read_manifest(checkpoint)
    recorded = None if manifest is None else manifest.get("summary", {}).get("checkpoint_digest")
    loaded = load_checkpoint(checkpoint, expected_digest=recorded)
    sequences = read_archive(archive)
    with spinner(f"Extracting {len(sequences)} utterances..."):
        extracted = extract_archive(loaded, sequences, threads)
        write_archive(extracted, out)
    click.echo(f"wrote {len(extracted)} records of dim {loaded.model.embedding_dim} to {out}")
    echo_run(run, out, {"records": len(extracted), "model": loaded.kind.value})


@cli.command(name="eval")
@click.argument("archive", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("items", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--task", type=click.Choice(["samediff", "abx"]), default="samediff", show_default=True)
@click.option("--pr-csv", type=click.Path(dir_okay=False, path_type=Path), help="Write the PR curve here.")
@click.option("--cross-speaker", is_flag=True, help="Score only pairs of words from different speakers.")
@click.option("--min-frames", type=click.IntRange(min=0), default=0, show_default=True,
              help="Skip words shorter than this.")
@click.option("--metric", type=click.Choice(METRICS), default="cosine", show_default=True)
@threads_option
def evaluate(
    archive: Path,
    items: Path,
    task: str,
    pr_csv: Optional[Path],
    cross_speaker: bool,
    min_frames: int,
    metric: str,
    threads: int,
) -> None:
    """Score features with same-different AP or minimal-pair ABX."""
    config = EvalConfig(metric=metric, cross_speaker=cross_speaker, min_frames=min_frames, threads=threads)
    run = RunConfig("eval", dict(config.to_dict(), archive=str(archive), items=str(items), task=task))
    if pr_csv is not None and task != "samediff":
        raise click.UsageError("--pr-csv applies to --task samediff only")
    features = index_sequences(read_archive(archive))
    with spinner("Evaluating..."):
        if task == "samediff":
            report = same_different_ap(load_word_list(items, features, min_frames), features, config)
        else:
            report = abx_error(load_abx_list(items, features), features, config)
    if pr_csv is not None:
        emit_pr_curve(report, pr_csv)
    click.echo(format_report(report))
    echo_run(run, pr_csv, report.to_dict() if pr_csv is not None else None)


@cli.command()
@click.argument("out_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--n-types", type=int, default=5, show_default=True)
@click.option("--n-speakers", type=int, default=4, show_default=True)
@click.option("--n-eval-speakers", type=int, default=2, show_default=True)
@click.option("--words-per-type", type=int, default=4, show_default=True, help="Tokens per speaker and type.")
@click.option("--frames-range", type=(int, int), default=(20, 35), show_default=True)
@click.option("--dim", type=int, default=39, show_default=True)
@click.option("--speaker-distortion", type=float, default=0.4, show_default=True)
@click.option("--noise-sigma", type=float, default=0.15, show_default=True)
@click.option("--class-dims", type=int, default=4, show_default=True, help="Dimensions carrying the word identity.")
@click.option("--nuisance-sigma", type=float, default=0.6, show_default=True,
              help="Spread of the per-token channel offset.")
@click.option("--pair-corruption", type=float, default=0.0, show_default=True,
              help="Fraction of pairs whose second word has the wrong type.")
@click.option("--max-pairs", type=int, default=None, help="Subsample the gold pairs.")
@click.option("--no-time-warp", is_flag=True)
@click.option("--seed", type=int, default=0, show_default=True)
def synth(
    out_dir: Path,
    n_types: int,
    n_speakers: int,
    n_eval_speakers: int,
    words_per_type: int,
    frames_range: Tuple[int, int],
    dim: int,
    speaker_distortion: float,
    noise_sigma: float,
    class_dims: int,
    nuisance_sigma: float,
    pair_corruption: float,
    max_pairs: Optional[int],
    no_time_warp: bool,
    seed: int,
) -> None:
    """Generate a synthetic corpus with pair, word and ABX lists."""
    config = SynthConfig(
        n_types=n_types,
        n_speakers=n_speakers,
        n_eval_speakers=n_eval_speakers,
        words_per_speaker_per_type=words_per_type,
        frames_range=frames_range,
        dim=dim,
        speaker_distortion=speaker_distortion,
        noise_sigma=noise_sigma,
        class_dims=class_dims,
        nuisance_sigma=nuisance_sigma,
        seed=seed,
        pair_corruption=pair_corruption,
        time_warp=not no_time_warp,
        max_pairs=max_pairs,
    )
    run = RunConfig("synth", dict(config.to_dict(), out_dir=str(out_dir)))
    with spinner("Generating corpus..."):
        corpus = generate_synthetic_corpus(config)
        paths = write_corpus(corpus, out_dir)
    for role, path in paths.items():
        click.echo(f"{role}: {path}")
    echo_run(run, out_dir / "corpus", {"utterances": len(corpus.features), "pairs": len(corpus.pairs)})


@cli.command()
@click.option("--model", "model_kind", type=click.Choice(["all"] + [kind.value for kind in ModelKind]),
              default="all", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tolerance", type=float, default=GRADCHECK_TOLERANCE, show_default=True)
def gradcheck(model_kind: str, seed: int, tolerance: float) -> None:
    """Compare analytic gradients with finite differences."""
    run = RunConfig("gradcheck", {"model": model_kind, "seed": seed, "tolerance": tolerance})
    kinds = list(ModelKind) if model_kind == "all" else [ModelKind(model_kind)]
    failed = []
    for kind in kinds:
        result = check_gradients(kind, seed, tolerance=tolerance)
        click.echo(
            f"{kind.value}: max relative error {result.max_relative_error:.3e} "
            f"({result.n_checked} checked, {result.n_skipped} skipped)"
        )
        if not result.passed:
            failed.append(kind.value)
    echo_run(run)
    if failed:
        raise NumericError(f"gradient check failed for {', '.join(failed)} (tolerance {tolerance:g})")


@cli.command()
@click.option("--seeds", default="0,1,2,3,4", show_default=True, help="Comma-separated corpus seeds.")
@click.option("--epochs", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--learning-rate", type=click.FloatRange(0.0, min_open=True), default=1.0, show_default=True,
              help="Adadelta rate for the CAE-based models.")
@click.option("--max-pairs", type=int, default=None, help="Subsample the gold pairs (default: all).")
@click.option("--pair-corruption", type=float, default=0.0, show_default=True)
@click.option("--nuisance-sigma", type=float, default=0.6, show_default=True,
              help="Spread of the per-token channel offset.")
@click.option("--variants", default=",".join(VARIANTS), show_default=True, help="Comma-separated variants.")
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path), help="Write scores as JSON.")
@threads_option
def experiment(
    seeds: str,
    epochs: int,
    learning_rate: float,
    max_pairs: Optional[int],
    pair_corruption: float,
    nuisance_sigma: float,
    variants: str,
    out: Optional[Path],
    threads: int,
) -> None:
    """Compare raw and learned features on synthetic corpora."""
    try:
        seed_values = tuple(int(value) for value in seeds.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {seeds!r}", param_hint="--seeds")
    config = ExperimentConfig(
        seeds=seed_values,
        epochs=epochs,
        adadelta_learning_rate=learning_rate,
        max_pairs=max_pairs,
        pair_corruption=pair_corruption,
        nuisance_sigma=nuisance_sigma,
        variants=tuple(name for name in variants.split(",") if name),
        threads=threads,
    )
    run = RunConfig("experiment", config.to_dict())
    with spinner("Running experiment..."):
        result = run_experiment(config)
    click.echo(result.format_table())
    summary = {"scores": [asdict(score) for score in result.scores], "passed": result.passed}
    if out is not None:
        save_json(out, summary)
    echo_run(run, out, summary)
    if not result.passed:
        raise NumericError("synthetic trend check failed")


def main() -> None:
    """Console entry point."""
    cli(prog_name=PROG_NAME)  # pragma: no cover


if __name__ == "__main__":
    main()  # pragma: no cover

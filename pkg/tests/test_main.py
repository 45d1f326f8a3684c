"""Test cases for the __main__ module."""
import json
import logging
from pathlib import Path
from typing import List

import numpy as np
import pytest
from click.testing import CliRunner
from click.testing import Result
from scipy.io import wavfile

from unsup_speech_features import __main__
from unsup_speech_features.experiment import RAW
from unsup_speech_features.experiment import ExperimentConfig
from unsup_speech_features.experiment import ExperimentResult
from unsup_speech_features.experiment import VariantScore
from unsup_speech_features.features.archive import read_archive
from unsup_speech_features.utils import file_digest


SMALL_SYNTH = [
    "--n-types",
    "3",
    "--n-speakers",
    "2",
    "--n-eval-speakers",
    "2",
    "--words-per-type",
    "2",
    "--frames-range",
    "6",
    "10",
    "--seed",
    "1",
]


@pytest.fixture
def runner() -> CliRunner:
    """Fixture for invoking command-line interfaces."""
    return CliRunner()


@pytest.fixture
def corpus(runner: CliRunner, tmp_path: Path) -> Path:
    """A small synthetic corpus on disk."""
    out_dir = tmp_path / "corpus"
    result = runner.invoke(__main__.cli, ["synth", str(out_dir)] + SMALL_SYNTH)
    assert result.exit_code == 0, result.output
    return out_dir


def invoke(runner: CliRunner, args: List[object]) -> Result:
    """Invoke the CLI with stringified arguments."""
    return runner.invoke(__main__.cli, [str(arg) for arg in args])


def test_help_succeeds(runner: CliRunner) -> None:
    """It exits with a status code of zero."""
    result = runner.invoke(__main__.cli, ["--help"])
    assert result.exit_code == 0
    assert "gradcheck" in result.output


def test_synth_writes_corpus(runner: CliRunner, corpus: Path) -> None:
    """The corpus files and a manifest are written."""
    for name in ("features.zrf", "speakers.tsv", "pairs.tsv", "words.tsv", "abx.tsv"):
        assert (corpus / name).is_file()
    manifest = json.loads((corpus / "corpus.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "synth"
    assert manifest["summary"]["pairs"] == 18


def test_synth_single_speaker_warns(runner: CliRunner, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
    """A one-speaker corpus is generated with a warning."""
    with caplog.at_level(logging.WARNING):
        result = invoke(runner, ["synth", tmp_path / "one", "--n-speakers", "1", "--n-types", "2"])
    assert result.exit_code == 0, result.output
    assert "Single training speaker" in caplog.text


def test_full_pipeline(runner: CliRunner, corpus: Path, tmp_path: Path) -> None:
    """Pairs, training, extraction and both evaluations run end to end."""
    archive, speakers = corpus / "features.zrf", corpus / "speakers.tsv"
    items, checkpoint = tmp_path / "items.zrd", tmp_path / "ckpt.zrc"
    features, pr_csv = tmp_path / "learned.zrf", tmp_path / "pr.csv"

    result = invoke(
        runner, ["pairs", archive, corpus / "pairs.tsv", items, "--speakers", speakers, "--model", "ctriamese"]
    )
    assert result.exit_code == 0, result.output
    assert "quadruplets: " in result.output
    assert "config digest: " in result.output

    result = invoke(
        runner,
        [
            "train", items, checkpoint, "--model", "ctriamese", "--epochs", "2", "--speaker-conditioning",
            "--batch-size", "64", "--val-words", corpus / "words.tsv", "--val-archive", archive,
        ],
    )
    assert result.exit_code == 0, result.output
    assert "trained 2 epochs, final loss" in result.output
    log_rows = (tmp_path / "ckpt.zrc.log.csv").read_text(encoding="utf-8").splitlines()
    assert log_rows[0] == "epoch,loss,val_ap"
    assert len(log_rows) == 3
    assert (tmp_path / "ckpt.zrc.manifest.json").is_file()

    result = invoke(runner, ["extract", checkpoint, archive, features])
    assert result.exit_code == 0, result.output
    assert "of dim 39" in result.output
    assert len(read_archive(features)) == len(read_archive(archive))

    result = invoke(runner, ["eval", features, corpus / "words.tsv", "--pr-csv", pr_csv])
    assert result.exit_code == 0, result.output
    assert "AP=" in result.output
    assert pr_csv.read_text(encoding="utf-8").startswith("recall,precision\n")
    assert (tmp_path / "pr.csv.manifest.json").is_file()

    result = invoke(runner, ["eval", features, corpus / "abx.tsv", "--task", "abx", "--cross-speaker"])
    assert result.exit_code == 0, result.output
    assert "ABX=" in result.output


def test_train_log_without_validation(runner: CliRunner, corpus: Path, tmp_path: Path) -> None:
    """Without validation the log has no AP column."""
    items, checkpoint = tmp_path / "items.zrd", tmp_path / "cae.zrc"
    invoke(runner, ["pairs", corpus / "features.zrf", corpus / "pairs.tsv", items, "--speakers", corpus / "speakers.tsv"])
    log_csv = tmp_path / "logs" / "cae.csv"
    result = invoke(runner, ["train", items, checkpoint, "--model", "cae", "--epochs", "1", "--log-csv", log_csv])
    assert result.exit_code == 0, result.output
    assert log_csv.read_text(encoding="utf-8").splitlines()[0] == "epoch,loss"


def write_wavs(directory: Path) -> None:
    """Two half-second noise recordings at 16 kHz and their speaker map."""
    directory.mkdir()
    rng = np.random.default_rng(0)
    for name in ("a", "b"):
        samples = rng.integers(-3000, 3000, size=8000).astype(np.int16)
        wavfile.write(directory / f"{name}.wav", 16000, samples)
    (directory / "speakers.tsv").write_text("a\tspk1\nb\tspk1\n", encoding="utf-8")


def test_featurize_directory(runner: CliRunner, tmp_path: Path) -> None:
    """Every WAV file becomes one 39-dim record."""
    write_wavs(tmp_path / "wavs")
    out = tmp_path / "mfcc.zrf"
    result = invoke(runner, ["featurize", tmp_path / "wavs", "--speakers", tmp_path / "wavs" / "speakers.tsv", "-o", out])
    assert result.exit_code == 0, result.output
    assert f"wrote 2 records to {out}" in result.output
    records = read_archive(out)
    assert [record.utterance_id for record in records] == ["a", "b"]
    assert records[0].frames.shape == (48, 39)


def test_featurize_list_file(runner: CliRunner, tmp_path: Path) -> None:
    """Relative paths in a list file resolve against the list's directory."""
    write_wavs(tmp_path / "wavs")
    listing = tmp_path / "wavs" / "files.txt"
    listing.write_text("# recordings\nb.wav\na.wav\n", encoding="utf-8")
    out = tmp_path / "mfcc.zrf"
    result = invoke(runner, ["featurize", listing, "--speakers", tmp_path / "wavs" / "speakers.tsv", "-o", out])
    assert result.exit_code == 0, result.output
    assert [record.utterance_id for record in read_archive(out)] == ["b", "a"]


def test_featurize_unknown_speaker(runner: CliRunner, tmp_path: Path) -> None:
    """Utterances missing from the speaker map are a data error."""
    write_wavs(tmp_path / "wavs")
    speakers = tmp_path / "partial.tsv"
    speakers.write_text("a\tspk1\n", encoding="utf-8")
    result = invoke(runner, ["featurize", tmp_path / "wavs", "--speakers", speakers, "-o", tmp_path / "out.zrf"])
    assert result.exit_code == 2


def test_usage_errors(runner: CliRunner, corpus: Path, tmp_path: Path) -> None:
    """Bad option combinations exit with 1."""
    archive = corpus / "features.zrf"
    result = invoke(runner, ["eval", archive, corpus / "abx.tsv", "--task", "abx", "--pr-csv", tmp_path / "pr.csv"])
    assert result.exit_code == 1
    assert "--pr-csv" in result.output

    result = invoke(runner, ["train", archive, tmp_path / "m.zrc", "--model", "cae", "--val-words", corpus / "words.tsv"])
    assert result.exit_code == 1
    assert "together" in result.output

    assert invoke(runner, ["frobnicate"]).exit_code == 1
    assert invoke(runner, ["experiment", "--seeds", "one,two"]).exit_code == 1


def test_data_errors(runner: CliRunner, corpus: Path, tmp_path: Path) -> None:
    """Malformed inputs exit with 2 and an error message."""
    archive, speakers = corpus / "features.zrf", corpus / "speakers.tsv"
    bad_pairs = tmp_path / "bad.tsv"
    bad_pairs.write_text("garbage\n", encoding="utf-8")
    result = invoke(runner, ["pairs", archive, bad_pairs, tmp_path / "x.zrd", "--speakers", speakers])
    assert result.exit_code == 2
    assert "Error: " in result.output

    items = tmp_path / "pairs.zrd"
    assert invoke(runner, ["pairs", archive, corpus / "pairs.tsv", items, "--speakers", speakers]).exit_code == 0
    result = invoke(runner, ["train", items, tmp_path / "m.zrc", "--model", "triamese"])
    assert result.exit_code == 2
    assert "holds pairs" in result.output

    result = invoke(runner, ["extract", archive, archive, tmp_path / "out.zrf"])
    assert result.exit_code == 2
    assert "not a checkpoint" in result.output

    assert invoke(runner, ["experiment", "--variants", "cae,lstm"]).exit_code == 2


def test_gradcheck(runner: CliRunner) -> None:
    """All objectives pass; a zero tolerance is a numeric failure."""
    result = invoke(runner, ["gradcheck"])
    assert result.exit_code == 0, result.output
    for kind in ("cae", "triamese", "ctriamese"):
        assert f"{kind}: max relative error" in result.output

    assert "config digest: " in result.output

    result = invoke(runner, ["gradcheck", "--model", "cae", "--tolerance", "0"])
    assert result.exit_code == 3
    assert "gradient check failed for cae" in result.output
    assert "config digest: " in result.output


def stub_result(cae_ap: float) -> ExperimentResult:
    """One-seed result comparing raw features (AP 0.5) with the CAE."""
    return ExperimentResult([VariantScore(RAW, 0, 0.5, 0.3), VariantScore("cae", 0, cae_ap, 0.2)])


def test_experiment_passes(runner: CliRunner, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """A passing comparison writes its scores and exits with 0."""
    seen: List[ExperimentConfig] = []

    def fake_run(config: ExperimentConfig) -> ExperimentResult:
        seen.append(config)
        return stub_result(0.7)

    monkeypatch.setattr(__main__, "run_experiment", fake_run)
    out = tmp_path / "scores.json"
    result = invoke(runner, ["experiment", "--seeds", "0", "--variants", "cae", "--epochs", "2", "--out", out])
    assert result.exit_code == 0, result.output
    assert "features" in result.output
    assert seen[0].seeds == (0,) and seen[0].variants == ("cae",) and seen[0].epochs == 2
    summary = json.loads(out.read_text(encoding="utf-8"))
    assert summary["passed"] is True
    assert [score["variant"] for score in summary["scores"]] == [RAW, "cae"]


def test_experiment_fails(runner: CliRunner, monkeypatch: pytest.MonkeyPatch) -> None:
    """A failed trend check exits with 3."""
    monkeypatch.setattr(__main__, "run_experiment", lambda config: stub_result(0.4))
    result = invoke(runner, ["experiment", "--seeds", "0", "--variants", "cae"])
    assert result.exit_code == 3
    assert "FAILED" in result.output


CORPUS_FILES = ("features.zrf", "speakers.tsv", "pairs.tsv", "words.tsv", "abx.tsv")


def test_synth_rerun_is_identical(runner: CliRunner, corpus: Path, tmp_path: Path) -> None:
    """The same seed writes byte-identical corpus files."""
    again = tmp_path / "again"
    assert invoke(runner, ["synth", again] + SMALL_SYNTH).exit_code == 0
    for name in CORPUS_FILES:
        assert file_digest(again / name) == file_digest(corpus / name), name


def test_synth_class_dims(runner: CliRunner, tmp_path: Path) -> None:
    """The class subspace cannot exceed the feature width."""
    result = invoke(runner, ["synth", tmp_path / "c", "--dim", "6", "--class-dims", "3"])
    assert result.exit_code == 0, result.output
    assert len(read_archive(tmp_path / "c" / "features.zrf")[0].frames[0]) == 6
    assert invoke(runner, ["synth", tmp_path / "d", "--dim", "3", "--class-dims", "4"]).exit_code != 0


def test_featurize_rerun_is_identical(runner: CliRunner, tmp_path: Path) -> None:
    """Serial and parallel featurization write the same archive."""
    write_wavs(tmp_path / "wavs")
    speakers = tmp_path / "wavs" / "speakers.tsv"
    digests = []
    for threads in (1, 2, 1):
        out = tmp_path / f"mfcc{len(digests)}.zrf"
        result = invoke(runner, ["featurize", tmp_path / "wavs", "--speakers", speakers, "-o", out, "--threads", threads])
        assert result.exit_code == 0, result.output
        digests.append(file_digest(out))
    assert len(set(digests)) == 1


def test_pairs_and_extract_reruns_are_identical(runner: CliRunner, corpus: Path, tmp_path: Path) -> None:
    """Pair datasets and extracted features do not depend on the run or the worker count."""
    archive, speakers = corpus / "features.zrf", corpus / "speakers.tsv"
    datasets = []
    for threads in (1, 2):
        items = tmp_path / f"items{threads}.zrd"
        args = ["pairs", archive, corpus / "pairs.tsv", items, "--speakers", speakers, "--threads", threads]
        assert invoke(runner, args).exit_code == 0
        datasets.append(items)
    assert file_digest(datasets[0]) == file_digest(datasets[1])

    checkpoint = tmp_path / "cae.zrc"
    assert invoke(runner, ["train", datasets[0], checkpoint, "--model", "cae", "--epochs", "1"]).exit_code == 0
    extracted = []
    for threads in (1, 2, 1):
        out = tmp_path / f"learned{len(extracted)}.zrf"
        result = invoke(runner, ["extract", checkpoint, archive, out, "--threads", threads])
        assert result.exit_code == 0, result.output
        extracted.append(file_digest(out))
    assert len(set(extracted)) == 1


def test_extract_checks_checkpoint_digest(
    runner: CliRunner, corpus: Path, tmp_path: Path, caplog: pytest.LogCaptureFixture
) -> None:
    """A checkpoint that no longer matches its training manifest is reported."""
    items = tmp_path / "items.zrd"
    invoke(runner, ["pairs", corpus / "features.zrf", corpus / "pairs.tsv", items, "--speakers", corpus / "speakers.tsv"])
    checkpoint, other = tmp_path / "cae.zrc", tmp_path / "other.zrc"
    assert invoke(runner, ["train", items, checkpoint, "--model", "cae", "--epochs", "1"]).exit_code == 0
    assert invoke(runner, ["train", items, other, "--model", "cae", "--epochs", "1", "--seed", "5"]).exit_code == 0
    manifest = json.loads((tmp_path / "cae.zrc.manifest.json").read_text(encoding="utf-8"))
    assert isinstance(manifest["summary"]["checkpoint_digest"], int)

    with caplog.at_level(logging.WARNING):
        result = invoke(runner, ["extract", checkpoint, corpus / "features.zrf", tmp_path / "a.zrf"])
    assert result.exit_code == 0, result.output
    assert "differs from expected" not in caplog.text

    checkpoint.write_bytes(other.read_bytes())
    with caplog.at_level(logging.WARNING):
        result = invoke(runner, ["extract", checkpoint, corpus / "features.zrf", tmp_path / "b.zrf"])
    assert result.exit_code == 0, result.output
    assert "differs from expected" in caplog.text

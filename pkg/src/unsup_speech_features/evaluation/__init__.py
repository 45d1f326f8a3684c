"""Same-different AP and ABX evaluation."""
from unsup_speech_features.evaluation.abx import abx_error
from unsup_speech_features.evaluation.items import AbxItem
from unsup_speech_features.evaluation.items import LabeledWord
from unsup_speech_features.evaluation.items import load_abx_list
from unsup_speech_features.evaluation.items import load_word_list
from unsup_speech_features.evaluation.report import EvalConfig
from unsup_speech_features.evaluation.report import EvalReport
from unsup_speech_features.evaluation.report import emit_pr_curve
from unsup_speech_features.evaluation.report import format_report
from unsup_speech_features.evaluation.samediff import average_precision
from unsup_speech_features.evaluation.samediff import same_different_ap


__all__ = [
    "AbxItem",
    "EvalConfig",
    "EvalReport",
    "LabeledWord",
    "abx_error",
    "average_precision",
    "emit_pr_curve",
    "format_report",
    "load_abx_list",
    "load_word_list",
    "same_different_ap",
]

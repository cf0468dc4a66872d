# Tests for error handling

import pytest

from seisforge.errors import (
    CompatibilityError,
    ConfigError,
    DataError,
    DomainError,
    ErrorClassifier,
    GenerationError,
    GenerationTelemetry,
    NumericalError,
    ParseError,
    RegenerationError,
    ScalingError,
    SeisForgeError,
    TrainingAbortedError,
    UsageError,
)


class TestExceptions:
    def test_parse_error_carries_line(self):
        error = ParseError("bad value", line=7)
        assert error.line == 7
        assert "line 7" in str(error)
        assert isinstance(error, ConfigError)

    def test_data_error_carries_row(self):
        error = DataError("non-finite", row=3)
        assert error.row == 3
        assert str(error).startswith("row 3")

    def test_training_aborted_lists_batch(self):
        error = TrainingAbortedError("non-finite loss", step=12, batch_ids=["a@0", "b@16"])
        assert error.step == 12
        assert error.batch_ids == ["a@0", "b@16"]
        assert "a@0, b@16" in str(error)
        assert isinstance(error, NumericalError)

    def test_regeneration_error_keeps_ledger(self):
        error = RegenerationError("exhausted", attempts=[{"attempt": 0, "reason": "period"}])
        assert error.attempts[0]["reason"] == "period"
        assert isinstance(error, GenerationError)


class TestErrorClassifier:
    @pytest.mark.parametrize(
        "error, category",
        [
            (ConfigError("x"), "CONFIG"),
            (ParseError("x", line=1), "CONFIG"),
            (DomainError("x"), "CONFIG"),
            (ScalingError("zero peak"), "CONFIG"),
            (FileNotFoundError("missing"), "CONFIG"),
            (RegenerationError("x", attempts=[]), "GENERATION"),
            (NumericalError("x"), "NUMERICAL"),
            (TrainingAbortedError("x", step=0, batch_ids=[]), "NUMERICAL"),
            (ZeroDivisionError("x"), "NUMERICAL"),
            (CompatibilityError("x"), "COMPATIBILITY"),
            (UsageError("x"), "FATAL"),
            (SeisForgeError("x"), "FATAL"),
            (RuntimeError("boom"), "FATAL"),
        ],
    )
    def test_categorize(self, error, category):
        assert ErrorClassifier.categorize(error) == category

    def test_message_fallback(self):
        assert ErrorClassifier.categorize(RuntimeError("matrix is singular")) == "NUMERICAL"
        assert ErrorClassifier.categorize(RuntimeError("unsupported version 9")) == "COMPATIBILITY"
        assert ErrorClassifier.categorize(RuntimeError("solver did not converge")) == "NUMERICAL"
        assert ErrorClassifier.categorize(RuntimeError("loss is NaN at step 3")) == "NUMERICAL"

    @pytest.mark.parametrize(
        "message",
        [
            "financial year closed",
            "timeout after 500 nanoseconds",
            "information missing",
            "hashtag",
            "versioning disabled",
        ],
    )
    def test_message_fallback_matches_whole_words(self, message):
        assert ErrorClassifier.categorize(RuntimeError(message)) == "FATAL"

    @pytest.mark.parametrize(
        "category, code",
        [("CONFIG", 2), ("GENERATION", 3), ("COMPATIBILITY", 4), ("NUMERICAL", 5), ("FATAL", 1), ("???", 1)],
    )
    def test_exit_codes(self, category, code):
        assert ErrorClassifier.exit_code(category) == code

    def test_only_numerical_and_generation_are_recoverable(self):
        assert ErrorClassifier.is_sample_recoverable("NUMERICAL")
        assert ErrorClassifier.is_sample_recoverable("GENERATION")
        assert not ErrorClassifier.is_sample_recoverable("CONFIG")
        assert not ErrorClassifier.is_sample_recoverable("FATAL")


class TestGenerationTelemetry:
    def test_report_is_sorted(self):
        telemetry = GenerationTelemetry()
        telemetry.record_skip("b2", "oracle", "NUMERICAL", "diverged")
        telemetry.record_skip("b1", "sdr", "GENERATION")
        report = telemetry.get_report()
        assert report["total_skipped"] == 2
        assert report["categories"] == {"GENERATION": 1, "NUMERICAL": 1}
        assert [item["sample_id"] for item in report["skipped"]] == ["b1", "b2"]
        assert telemetry.skipped_ids() == ["b1", "b2"]

    def test_empty_report(self):
        telemetry = GenerationTelemetry()
        assert telemetry.total_skipped == 0
        assert telemetry.get_report()["skipped"] == []

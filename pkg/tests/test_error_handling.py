import numpy as np
import pytest

from src.utils.error_handling import (
    CheckFailedError,
    DegenerateSampleError,
    InvalidConfigError,
    InvalidInputError,
    NearTieError,
    ReplicationBudgetError,
    ShrinkageError,
    check_skip_budget,
    retry,
    skip_on,
)
from src.utils.run_metrics import RunMetrics
from src.utils.validation import (
    relative_frobenius_error,
    validate_dimensions,
    validate_positive_spectrum,
    validate_square,
)


class TestHierarchy:
    @pytest.mark.parametrize(
        "error",
        [
            InvalidInputError,
            DegenerateSampleError,
            NearTieError,
            ReplicationBudgetError,
            InvalidConfigError,
            CheckFailedError,
        ],
    )
    def test_all_errors_share_a_base(self, error):
        assert issubclass(error, ShrinkageError)

    def test_input_errors_are_value_errors(self):
        assert issubclass(InvalidInputError, ValueError)
        assert issubclass(InvalidConfigError, ValueError)


class TestRetry:
    def test_recovers_after_failures(self):
        calls = []

        @retry(OSError, tries=3, delay=0.0)
        def flaky():
            calls.append(1)
            if len(calls) < 3:
                raise OSError("busy")
            return "done"

        assert flaky() == "done"
        assert len(calls) == 3

    def test_gives_up(self):
        @retry(OSError, tries=2, delay=0.0)
        def broken():
            raise OSError("gone")

        with pytest.raises(OSError):
            broken()

    def test_rejects_zero_tries(self):
        with pytest.raises(InvalidInputError):
            retry(OSError, tries=0)

    def test_other_errors_pass_through(self):
        calls = []

        @retry(OSError, tries=3, delay=0.0)
        def wrong():
            calls.append(1)
            raise KeyError("x")

        with pytest.raises(KeyError):
            wrong()
        assert len(calls) == 1


class TestSkipOn:
    def test_returns_default(self):
        @skip_on(NearTieError, default_value=None)
        def replicate(i):
            if i == 1:
                raise NearTieError("tie")
            return i

        assert [replicate(i) for i in range(3)] == [0, None, 2]

    def test_unlisted_errors_propagate(self):
        @skip_on(NearTieError, default_value=None)
        def replicate():
            raise InvalidInputError("bad")

        with pytest.raises(InvalidInputError):
            replicate()


class TestSkipBudget:
    def test_below_budget(self):
        check_skip_budget(0, 10)
        check_skip_budget(9, 1000)

    def test_at_budget(self):
        with pytest.raises(ReplicationBudgetError):
            check_skip_budget(10, 1000)


class TestValidation:
    def test_square(self):
        with pytest.raises(InvalidInputError):
            validate_square(np.ones((2, 3)))
        with pytest.raises(InvalidInputError):
            validate_square(np.array([[np.nan]]))

    def test_spectrum(self):
        with pytest.raises(InvalidInputError):
            validate_positive_spectrum(np.array([1.0, -1.0]))
        with pytest.raises(InvalidInputError):
            validate_positive_spectrum(np.array([]))

    @pytest.mark.parametrize("value", [0, -2, 2.5, True, "3"])
    def test_dimensions(self, value):
        with pytest.raises(InvalidInputError):
            validate_dimensions(p=value)

    def test_numpy_integers_are_dimensions(self):
        validate_dimensions(p=np.int64(3))

    def test_relative_error_of_zero_reference(self):
        assert relative_frobenius_error(np.ones((2, 2)), np.zeros((2, 2))) == 2.0


class TestRunMetrics:
    def test_summary_and_save(self, tmp_path):
        metrics = RunMetrics("verify", output_dir=tmp_path)
        metrics.start_stage("simulate")
        metrics.end_stage("simulate")
        metrics.record_replications("gaussian/identity", 990, skipped=10)
        metrics.record_check("penrose conditions", True)
        metrics.record_check("a0 scan", False)

        summary = metrics.summary()
        assert "gaussian/identity: 990 (10 skipped)" in summary
        assert "Checks: 1 passed, 1 failed" in summary
        assert "FAILED a0 scan" in summary

        saved = metrics.save("failed")
        assert saved.endswith("_failed.json")
        assert metrics.metrics["total_replications"] == 990
        assert metrics.metrics["total_skipped"] == 10

import numpy as np
import pandas as pd
import pytest

from src.bench.compare_families_pipeline import CompareFamiliesPipeline
from src.bench.compare_loss_pipeline import CompareLossPipeline
from src.bench.prial_pipeline import PrialPipeline
from src.bench.sweep_alpha_pipeline import SweepAlphaPipeline
from src.bench.sweep_b_pipeline import SweepBPipeline
from src.bench.verify_pipeline import VerifyPipeline
from src.shrinkage.estimators import ShrinkagePsi
from src.shrinkage.matrix_core import SigmaSpec, sigma_build
from src.utils.error_handling import CheckFailedError, InvalidConfigError


def read_result(path) -> pd.DataFrame:
    return pd.read_csv(path, skiprows=1)


class TestSweepB:
    def test_auto_grid_and_certified_flag(self, make_config):
        config = make_config("sweep-b", p=6, m=4, b_points=4)
        SweepBPipeline(config).run()
        table = read_result(config.out)
        assert list(table.columns) == list(SweepBPipeline.columns)
        # b0(6, 4) = 2, so the auto grid is 2, 4, 6, 8
        np.testing.assert_allclose(table["b"], [2.0, 4.0, 6.0, 8.0])
        assert table["certified"].tolist() == [True, False, False, False]
        assert (table["reps"] == 40).all()
        assert (table["seed"] == 42).all()

    def test_header_line(self, make_config):
        config = make_config("sweep-b", p=6, m=4, b_points=2)
        SweepBPipeline(config).run()
        header = config.out.read_text().splitlines()[0]
        assert header.startswith("# command=sweep-b p=6 m=4")
        assert "seed=42" in header
        assert header.endswith("version=0.1.0")

    def test_explicit_b_values(self, make_config):
        config = make_config("sweep-b", p=6, m=4, b=(0.5, 1.0))
        table = SweepBPipeline(config).run()
        assert table["b"].tolist() == [0.5, 1.0]
        assert table["certified"].tolist() == ["true", "true"]

    def test_small_alpha_is_not_certified(self, make_config):
        config = make_config("sweep-b", p=6, m=4, alpha=(0.5,), b=(1.0,))
        table = SweepBPipeline(config).run()
        assert table["certified"].tolist() == ["false"]

    @pytest.mark.parametrize(
        "psi, bound, expected",
        [
            (ShrinkagePsi.haff(1.0, 2.0), 2.0, True),
            (ShrinkagePsi.haff(1.0, 2.5), 2.0, False),
            (ShrinkagePsi.haff(0.5, 1.0), 2.0, False),
            (ShrinkagePsi.efron_morris_dey(2.0, 1.0), 2.0, False),
        ],
    )
    def test_is_certified(self, psi, bound, expected):
        assert PrialPipeline.is_certified(psi, bound) is expected

    def test_needs_single_setting(self, make_config):
        config = make_config("sweep-b", p=6, m=4, dist=("gaussian", "student"))
        with pytest.raises(InvalidConfigError):
            SweepBPipeline(config).run()

    def test_zero_bound_needs_explicit_b(self, make_config):
        config = make_config("sweep-b", p=6, m=1)
        with pytest.raises(InvalidConfigError):
            SweepBPipeline(config).run()

    def test_writes_paired_losses(self, make_config, tmp_path):
        losses_dir = tmp_path / "losses"
        config = make_config("sweep-b", p=6, m=4, b_points=2, losses_dir=losses_dir)
        SweepBPipeline(config).run()
        files = list(losses_dir.glob("*.parquet"))
        assert len(files) == 1
        frame = pd.read_parquet(files[0])
        assert frame.columns[:2].tolist() == ["row", "baseline"]
        assert len(frame) == 40

    def test_stdout_output(self, make_config, capsys):
        config = make_config("sweep-b", p=6, m=4, b_points=2, out="-")
        SweepBPipeline(config).run()
        out = capsys.readouterr().out
        assert out.startswith("# command=sweep-b")
        assert out.splitlines()[1].startswith("b,prial_percent")


class TestSweepAlpha:
    def test_rows_per_combination(self, make_config):
        config = make_config(
            "sweep-alpha", p=8, m=4, alpha=(1.0, 4.0), sigma=("identity", "ar1")
        )
        table = SweepAlphaPipeline(config).run()
        assert len(table) == 2 * 2 * 2
        assert set(table["dist"]) == {"gaussian", "student"}
        assert table["certified"].eq("true").all()

    def test_thread_count_does_not_change_output(self, make_config, tmp_path):
        outputs = []
        for threads in (1, 4):
            config = make_config(
                "sweep-alpha",
                p=8,
                m=4,
                alpha=(1.0, 4.0),
                threads=threads,
                out=tmp_path / f"alpha_{threads}.csv",
            )
            SweepAlphaPipeline(config).run()
            outputs.append(config.out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_dense_sigma_file(self, make_config, tmp_path):
        path = tmp_path / "sigma.csv"
        np.savetxt(path, sigma_build(SigmaSpec.ar1(8, 0.5)), delimiter=",")
        config = make_config(
            "sweep-alpha",
            p=8,
            m=4,
            alpha=(1.0,),
            dist=("gaussian",),
            sigma=("dense",),
            sigma_file=path,
        )
        table = SweepAlphaPipeline(config).run()
        assert table["sigma"].tolist() == ["dense"]

    def test_dense_sigma_wrong_shape(self, make_config, tmp_path):
        path = tmp_path / "sigma.csv"
        np.savetxt(path, np.eye(3), delimiter=",")
        config = make_config(
            "sweep-alpha", p=8, m=4, sigma=("dense",), sigma_file=path
        )
        with pytest.raises(InvalidConfigError):
            SweepAlphaPipeline(config).run()


class TestCompareLoss:
    def test_columns_and_bounds(self, make_config):
        config = make_config("compare-loss", p=8, m=4, alpha=(0.5, 1.0))
        returned = CompareLossPipeline(config).run()
        table = read_result(config.out)
        assert len(table) == len(returned) == 2 * 2
        assert list(table.columns) == list(CompareLossPipeline.columns)
        # v = 8, r = 4: b0 = 6/5, b1 = 2*3*13/(5*7)
        np.testing.assert_allclose(table["b0"], 1.2)
        np.testing.assert_allclose(table["b1"], 78 / 35)
        assert table["certified"].tolist() == [False, True, False, True]


class TestCompareFamilies:
    def test_family_rows(self, make_config):
        config = make_config(
            "compare-families", p=8, m=4, dist=("gaussian",), alpha=(1.0, 2.0)
        )
        CompareFamiliesPipeline(config).run()
        table = read_result(config.out)
        per_setting = ["james-stein"] + ["haff", "efron-morris-dey"] * 2
        assert table["family"].tolist() == per_setting * 2
        james_stein = table[table["family"] == "james-stein"]
        assert james_stein["alpha"].isna().all()
        assert james_stein["b"].isna().all()
        assert table.loc[table["family"] == "haff", "b"].eq(1.2).all()


class TestVerify:
    def small(self, make_config, tmp_path, **overrides):
        values = {
            "reps": 400,
            "trials": 40,
            "dist": ("gaussian",),
            "out": tmp_path / "verify.txt",
        }
        values.update(overrides)
        return make_config("verify", **values)

    def test_all_checks_pass(self, make_config, tmp_path):
        config = self.small(make_config, tmp_path)
        VerifyPipeline(config).run()
        lines = config.out.read_text().splitlines()
        assert lines[0].startswith("# command=verify")
        assert lines[-1].startswith("verify: ")
        assert lines[-1].endswith(" passed, 0 failed")
        assert not any(line.startswith("FAIL") for line in lines)
        assert any("exact rhs" in line for line in lines)
        assert any(line.startswith("INFO regression vs direct") for line in lines)

    def test_shifted_scan_fails(self, make_config, tmp_path):
        config = self.small(make_config, tmp_path, scan_center_factor=2.0)
        with pytest.raises(CheckFailedError):
            VerifyPipeline(config).run()
        report = config.out.read_text()
        assert "FAIL a0 scan gaussian identity" in report
        assert "PASS penrose conditions" in report

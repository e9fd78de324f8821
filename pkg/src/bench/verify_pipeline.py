"""Verification gate for the shrinkage library.

Runs, in order:
1. The Gaussian Stein-Haff identity suite (Phi = identity and Haff(1, 1))
2. The g(Psi) certificate sweep for the Haff family
3. The a0 optimality scan for every configured model and Sigma
4. The matrix-primitive suite (Penrose conditions, reconstruction, square root)
5. The regression-path projector check
6. Informational checks: regression vs direct sampling of tr(S), and the
   Student-t Stein-Haff identity under the companion law

Any failed gated check makes the run raise CheckFailedError (exit code 1)
after the report is written.
"""

from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import linalg, stats

from src.bench.prial_pipeline import PrialPipeline
from src.config.experiment_config import NUMERICS
from src.config.logging_config import get_logger
from src.shrinkage.elliptical_model import (
    ModelSpec,
    canonical_reduce,
    default_design,
    replication_rng,
    sample_canonical,
    sample_noise,
    sample_regression,
)
from src.shrinkage.estimators import ShrinkagePsi, baseline_a
from src.shrinkage.identity_checks import (
    certify_haff_bound,
    stein_haff_check,
    stein_haff_check_elliptical,
)
from src.shrinkage.losses_risk import LossKind, risk_optimality_scan
from src.shrinkage.matrix_core import (
    SigmaSpec,
    eigen_sym_truncated,
    gram,
    penrose_residuals,
    pinv_from_eigen,
    reconstruction_error,
    sigma_build,
    sym_sqrt,
)
from src.utils.error_handling import CheckFailedError
from src.utils.validation import relative_frobenius_error

logger = get_logger("bench.verify")

MATRIX_TOL = 1e-8
SQRT_TOL = 1e-10


class CheckOutcome(NamedTuple):
    check: str
    passed: bool
    detail: str
    gated: bool = True

    @property
    def status(self) -> str:
        if not self.gated:
            return "INFO"
        return "PASS" if self.passed else "FAIL"


class VerifyPipeline(PrialPipeline):
    """Pipeline for the `verify` subcommand."""

    columns = ("check", "status", "detail")

    def simulate(self) -> pd.DataFrame:
        outcomes: list[CheckOutcome] = []
        for suite in (
            self.stein_haff_suite,
            self.certificate_suite,
            self.scan_suite,
            self.matrix_suite,
            self.regression_suite,
            self.companion_suite,
        ):
            self.metrics.start_stage(suite.__name__)
            found = suite()
            self.metrics.end_stage(suite.__name__)
            for outcome in found:
                if outcome.gated:
                    self.metrics.record_check(outcome.check, outcome.passed)
                ok = outcome.passed or not outcome.gated
                message = f"{outcome.status} {outcome.check}: {outcome.detail}"
                (logger.info if ok else logger.error)(message)
            outcomes.extend(found)

        records = [(o.check, o.status, o.detail) for o in outcomes]
        return pd.DataFrame(records, columns=list(self.columns))

    def load(self, table: pd.DataFrame) -> None:
        failed = table[table["status"] == "FAIL"]
        lines = [self.loader.header_line()]
        lines += [
            f"{row.status:<5}{row.check}: {row.detail}" for row in table.itertuples()
        ]
        gated = table[table["status"] != "INFO"]
        lines.append(f"verify: {len(gated) - len(failed)} passed, {len(failed)} failed")
        self.loader.load_report("\n".join(lines))
        if len(failed):
            raise CheckFailedError(
                f"{len(failed)} check(s) failed: " + "; ".join(failed["check"].tolist())
            )

    def _gated_sigma_kinds(self) -> list[str]:
        return [kind for kind in self.config.sigma if kind != "dense"]

    def stein_haff_suite(self) -> list[CheckOutcome]:
        """Gaussian Stein-Haff identity with Phi = identity and Haff(1, 1)."""
        config = self.config
        outcomes = []
        phis = (
            ("identity", ShrinkagePsi.constant(1.0)),
            ("haff(1,1)", ShrinkagePsi.haff(1.0, 1.0)),
        )
        for p, m in config.extras["identity_dims"]:
            v, r = max(p, m), min(p, m)
            for kind in self._gated_sigma_kinds():
                sigma = sigma_build(SigmaSpec(kind, p, config.rho))
                for phi_name, phi in phis:
                    result = stein_haff_check(
                        sigma, p, m, phi, config.reps, config.seed, config.n_threads
                    )
                    name = f"stein-haff {kind} p={p} m={m} phi={phi_name}"
                    outcomes.append(
                        CheckOutcome(
                            name,
                            result.passed,
                            f"lhs={result.lhs_mean:.4f}+-{result.lhs_se:.4f} "
                            f"rhs={result.rhs_mean:.4f}+-{result.rhs_se:.4f} "
                            f"z={result.z_score:.3f} reps={result.reps}",
                        )
                    )
                    if phi.family == "constant":
                        exact = result.rhs_mean == r * v and result.rhs_se == 0
                        outcomes.append(
                            CheckOutcome(
                                f"{name} exact rhs",
                                exact,
                                f"rhs per draw = {result.rhs_mean:.12g}, r*v = {r * v}",
                            )
                        )
        return outcomes

    def certificate_suite(self) -> list[CheckOutcome]:
        """g(Psi) of the Haff family against its spectrum-free margin."""
        config = self.config
        slack = NUMERICS["bound_slack"]
        outcomes = []
        for k, (v, r) in enumerate(config.extras["bound_dims"]):
            rng = replication_rng(config.seed, k, stream=2)
            result = certify_haff_bound(v, r, config.trials, rng)
            outcomes.append(
                CheckOutcome(
                    f"g(psi) certificate v={v} r={r}",
                    result.worst_excess <= slack and result.max_margin <= slack,
                    f"max g-margin={result.worst_excess:.3e} "
                    f"max margin={result.max_margin:.3e} "
                    f"trials={result.trials} resampled={result.resampled}",
                )
            )
        return outcomes

    def scan_suite(self) -> list[CheckOutcome]:
        """Risk scan of a S around the configured center; argmin must be the center."""
        config = self.config
        loss_kind = LossKind(config.loss)
        outcomes = []
        for dist in config.dist:
            model = self.model_for(dist)
            a0 = baseline_a(model, config.p, config.m, loss_kind.value)
            center = config.scan_center_factor * a0
            grid = [center * factor for factor in config.extras["scan_grid"]]
            for kind in config.sigma:
                scan = risk_optimality_scan(
                    model,
                    self.sigma_spec_for(kind),
                    config.p,
                    config.m,
                    grid,
                    loss_kind,
                    reps=max(2, config.reps // 4),
                    seed=config.seed,
                    threads=config.n_threads,
                )
                outcomes.append(
                    CheckOutcome(
                        f"a0 scan {model.label} {kind} p={config.p} m={config.m}",
                        bool(np.isclose(scan.argmin, center, rtol=1e-12, atol=0.0)),
                        f"argmin={scan.argmin:.6g} center={center:.6g} a0={a0:.6g}",
                    )
                )
        return outcomes

    def matrix_suite(self) -> list[CheckOutcome]:
        """Penrose conditions, reconstruction and sym_sqrt on random instances."""
        config = self.config
        rng = replication_rng(config.seed, 0, stream=3)
        worst = {"penrose": 0.0, "reconstruction": 0.0, "trace": 0.0, "sqrt": 0.0}
        rank_ok = True
        instances = max(1, config.trials // 2)
        for k in range(instances):
            if k % 2 == 0:
                p = int(rng.integers(1, 11))
                m = p + int(rng.integers(3, 11))
            else:
                m = int(rng.integers(1, 11))
                p = m + int(rng.integers(3, 11))
            s = gram(rng.standard_normal((m, p)))
            es = eigen_sym_truncated(s, max_rank=min(p, m))
            s_pinv = pinv_from_eigen(es)
            rank_ok &= es.r == min(p, m)
            worst["penrose"] = max(worst["penrose"], *penrose_residuals(s, s_pinv))
            worst["reconstruction"] = max(
                worst["reconstruction"], reconstruction_error(es, s)
            )
            trace_gap = abs(np.trace(s_pinv @ s) - es.r) / es.r
            worst["trace"] = max(worst["trace"], trace_gap)
            ar1 = sigma_build(SigmaSpec.ar1(p, 0.9))
            root = sym_sqrt(ar1)
            sqrt_error = relative_frobenius_error(root @ root, ar1)
            worst["sqrt"] = max(worst["sqrt"], sqrt_error)

        ar1_3 = sigma_build(SigmaSpec.ar1(3, 0.9))
        expected = np.array([[1.0, 0.9, 0.81], [0.9, 1.0, 0.9], [0.81, 0.9, 1.0]])
        detail = f"over {instances} instances"
        return [
            CheckOutcome(
                "penrose conditions",
                worst["penrose"] <= MATRIX_TOL,
                f"max residual={worst['penrose']:.3e} {detail}",
            ),
            CheckOutcome(
                "eigen reconstruction",
                worst["reconstruction"] <= MATRIX_TOL and rank_ok,
                f"max error={worst['reconstruction']:.3e} ranks ok={rank_ok}",
            ),
            CheckOutcome(
                "tr(S+ S) = r",
                worst["trace"] <= MATRIX_TOL,
                f"max relative gap={worst['trace']:.3e}",
            ),
            CheckOutcome(
                "sym_sqrt round trip",
                worst["sqrt"] <= SQRT_TOL,
                f"max error={worst['sqrt']:.3e}",
            ),
            CheckOutcome(
                "sigma_build ar1",
                bool(np.allclose(ar1_3, expected, rtol=0, atol=1e-15)),
                "rho=0.9 p=3",
            ),
        ]

    def regression_suite(self) -> list[CheckOutcome]:
        """Canonical reduction against the projector form, and a sampling smoke test."""
        config = self.config
        n, q, p = config.extras["regression_dims"]
        rng = replication_rng(config.seed, 0, stream=4)
        model = ModelSpec.gaussian()
        identity = np.eye(p)

        x = default_design(n, q, config.seed)
        beta = rng.standard_normal((q, p))
        y = x @ beta + sample_noise(model, n, identity, identity, rng)
        sample = canonical_reduce(y, x, beta)
        projector = x @ linalg.solve(x.T @ x, x.T, assume_a="pos")
        expected = y.T @ (np.eye(n) - projector) @ y
        error = relative_frobenius_error(sample.S, expected)
        outcomes = [
            CheckOutcome(
                f"canonical reduction n={n} q={q} p={p}",
                error <= MATRIX_TOL,
                f"relative error={error:.3e}",
            )
        ]

        draws = 2000
        regression, direct = [], []
        for k in range(draws):
            rng_regression = replication_rng(config.seed, k, stream=5)
            rng_direct = replication_rng(config.seed, k, stream=6)
            via_x = sample_regression(model, n, q, identity, rng_regression, x=x)
            via_u = sample_canonical(model, p, n - q, identity, rng_direct)
            regression.append(np.trace(via_x.S))
            direct.append(np.trace(via_u.S))
        ks = stats.ks_2samp(regression, direct)
        outcomes.append(
            CheckOutcome(
                "regression vs direct tr(S)",
                ks.pvalue > 0.01,
                f"KS statistic={ks.statistic:.4f} p-value={ks.pvalue:.4f} "
                f"draws={draws}",
                gated=False,
            )
        )
        return outcomes

    def companion_suite(self) -> list[CheckOutcome]:
        """Student-t Stein-Haff identity under the companion law, reported only."""
        config = self.config
        if "student" not in config.dist:
            return []
        p, m = config.extras["identity_dims"][0]
        model = self.model_for("student")
        result = stein_haff_check_elliptical(
            model,
            np.eye(p),
            p,
            m,
            ShrinkagePsi.constant(1.0),
            max(2, config.reps // 4),
            config.seed,
            config.n_threads,
        )
        return [
            CheckOutcome(
                f"stein-haff companion {model.label} p={p} m={m} phi=identity",
                result.passed,
                f"lhs={result.lhs_mean:.4f}+-{result.lhs_se:.4f} "
                f"K* rhs={result.rhs_mean:.4f}+-{result.rhs_se:.4f} "
                f"z={result.z_score:.3f}",
                gated=False,
            )
        ]

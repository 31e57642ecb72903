"""Self-checks that compare the simulator against closed-form results.

Three checks: the occupancy law on a long unbounded Markovian run, the
steady-state means of that run against theory, and the blocking
probability of a finite-buffer run against the geometric formula.  Each
returns a CheckResult; the command-line `validate` subcommand prints one
line per check and fails if any check fails.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import engine, queueing
from .events import FlowKey, Protocol
from .errors import UnstableSystemError
from .scenario import (AttackSchedule, QueueMode, ScenarioConfig, SourceKind,
                       SourceSpec)

LITTLE_LAMBDA = 5.0
LITTLE_MU = 10.0
LITTLE_HORIZON_S = 10_000.0
LITTLE_RESIDUAL_TOL = 0.05
MEAN_REL_TOL = 0.05

BLOCKING_LAMBDA = 9.0
BLOCKING_MU = 10.0
BLOCKING_BUFFER_K = 20          # 20 waiting slots + 1 in service
BLOCKING_MIN_ARRIVALS = 1_000_000
BLOCKING_ABS_TOL = 0.02
# An off-by-one buffer moves the blocking probability by roughly a factor
# of rho (about 11% relative here), far above the run-to-run noise of a
# million-arrival sample, so a relative gate is what makes the check able
# to catch that class of bug.  Absolute tolerance alone cannot see it.
BLOCKING_REL_TOL = 0.08

DEFAULT_VALIDATE_SEED = 20_601


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.details.items())
        return f"[{status}] {self.name}: {parts}"


def poisson_scenario(lam: float, mu: float, horizon_s: float,
                     buffer_k: int | None, seed: int) -> ScenarioConfig:
    """Single Poisson flow into a Markovian server; sizes are irrelevant."""
    if buffer_k is None and lam >= mu:
        raise UnstableSystemError(
            f"unbounded queue needs lambda < mu, got {lam} >= {mu}")
    flow = FlowKey(src="gen", src_port=1, dst="sink", dst_port=1,
                   protocol=Protocol.UDP)
    src = SourceSpec(kind=SourceKind.POISSON, flow=flow, packet_size=512,
                     start_s=0.0, end_s=horizon_s, rate_pps=lam)
    return ScenarioConfig(seed=seed, horizon_s=horizon_s,
                          link_capacity=1_000_000,
                          queue_mode=QueueMode.MARKOVIAN,
                          buffer_k=buffer_k, sources=(src,),
                          attack=AttackSchedule(), service_rate_mu=mu)


def check_little(seed: int = DEFAULT_VALIDATE_SEED,
                 lam: float = LITTLE_LAMBDA, mu: float = LITTLE_MU,
                 horizon_s: float = LITTLE_HORIZON_S) -> tuple[CheckResult, CheckResult]:
    """Occupancy-law residuals and steady-state means from one long run."""
    theory = queueing.mm1_mean_metrics(lam, mu)  # rejects lam >= mu
    scenario = poisson_scenario(lam, mu, horizon_s, buffer_k=None, seed=seed)
    t0 = time.perf_counter()
    trace = engine.run(scenario)
    elapsed = time.perf_counter() - t0
    report = queueing.little_law_check(trace)

    little_ok = (report.residual_n <= LITTLE_RESIDUAL_TOL
                 and report.residual_nq <= LITTLE_RESIDUAL_TOL)
    little = CheckResult(
        name="occupancy law (N = lambda W, Nq = lambda Wq)",
        passed=little_ok,
        details={"residual_n": report.residual_n,
                 "residual_nq": report.residual_nq,
                 "lambda": report.lambda_measured,
                 "runtime_s": elapsed})

    n_err = abs(report.n_measured - theory.mean_in_system) / theory.mean_in_system
    w_err = abs(report.w_measured_s - theory.mean_sojourn_s) / theory.mean_sojourn_s
    means = CheckResult(
        name="steady-state means vs closed form",
        passed=n_err <= MEAN_REL_TOL and w_err <= MEAN_REL_TOL,
        details={"n_measured": report.n_measured,
                 "n_expected": theory.mean_in_system,
                 "w_measured_s": report.w_measured_s,
                 "w_expected_s": theory.mean_sojourn_s,
                 "n_rel_err": n_err, "w_rel_err": w_err})
    return little, means


def check_blocking(seed: int = DEFAULT_VALIDATE_SEED,
                   lam: float = BLOCKING_LAMBDA, mu: float = BLOCKING_MU,
                   buffer_k: int = BLOCKING_BUFFER_K,
                   min_arrivals: int = BLOCKING_MIN_ARRIVALS,
                   buffer_bias: int = 0) -> CheckResult:
    """Simulated drop fraction against the geometric blocking formula.

    buffer_bias shifts the engine's effective buffer and exists so tests
    can prove this check catches an off-by-one capacity bug.
    """
    expected = queueing.mm1k_blocking(lam, mu, buffer_k)
    horizon_s = min_arrivals / lam * 1.02  # small margin over the target count
    scenario = poisson_scenario(lam, mu, horizon_s, buffer_k=buffer_k, seed=seed)
    t0 = time.perf_counter()
    trace = engine.run(scenario, collect_trace=False, buffer_bias=buffer_bias)
    elapsed = time.perf_counter() - t0
    s = trace.summary
    measured = s.drop_fraction
    abs_err = abs(measured - expected)
    rel_err = abs_err / expected
    return CheckResult(
        name="finite-buffer blocking probability",
        passed=(abs_err <= BLOCKING_ABS_TOL and rel_err <= BLOCKING_REL_TOL
                and s.arrivals >= min_arrivals),
        details={"measured": measured, "expected": expected,
                 "abs_err": abs_err, "rel_err": rel_err,
                 "arrivals": s.arrivals, "runtime_s": elapsed})


def run_all(seed: int = DEFAULT_VALIDATE_SEED, buffer_bias: int = 0,
            lam: float = LITTLE_LAMBDA, mu: float = LITTLE_MU) -> list[CheckResult]:
    little, means = check_little(seed=seed, lam=lam, mu=mu)
    blocking = check_blocking(seed=seed, buffer_bias=buffer_bias)
    return [little, means, blocking]

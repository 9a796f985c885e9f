"""Seeded verification suite: runs every identity check and writes a report.

Each check draws from its own PCG64 stream. Draws hitting a pole, or where
double precision cannot resolve the check's tolerance (cancellation ratio
above :func:`~osface.sampling.condition_limit`), are rejected and counted;
they never produce a record.
"""

from __future__ import annotations

import itertools
import logging
import os
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from . import face_model, formulas, state_sum, theta
from .errors import ConfigError, DegenerateSampleError, PoleError
from .pfaffian import pf_by_definition, pf_by_elimination, pf_by_expansion, pf_condition
from .report import VerificationReport, relative_residual
from .sampling import (
    SamplingError,
    condition_limit,
    draw_complex,
    draw_point,
    make_rng,
    random_skew,
)
from .state_sum import ParameterPoint, oracle_condition

log = logging.getLogger(__name__)

CONFIG_ENV = "OSFACE_CONFIG"
DEFAULT_NOMES = (0.1, 0.3, 0.5, 0.7)
DEFAULT_SEED = 20181010
DEFAULT_OUT = "osface-report.jsonl"
GROUPS = ("theta", "pfaffian", "ybe", "reflection", "oracle", "recursion",
          "formulas", "identity", "appendix")
#: Check-name prefixes belonging to each group.
GROUP_PREFIXES = {"ybe": ("rmatrix",)}

#: Accepted samples per check and nome (per dimension for Pfaffian checks).
DEFAULT_SAMPLES = {
    "theta": 1000,
    "pfaffian": 500,
    "ybe": 500,
    "ice_rule": 100,
    "h_periodicity": 100,
    "reflection": 500,
    "two_site": 200,
    "symmetry": 20,
    "oracle_period": 20,
    "recursion": 20,
    "closed_forms": 50,
    "first_row": 20,
    "factor_period": 20,
    "identity": 50,
    "factorization": 50,
    "zero_height": 50,
    "appendix": 100,
}
MAX_DRAWS_PER_SAMPLE = 200


@dataclass
class SuiteConfig:
    nomes: tuple[float, ...] = DEFAULT_NOMES
    samples_per_check: int | None = None
    seed: int = DEFAULT_SEED
    n_max: int = 5
    tolerances: dict[str, float] = field(default_factory=dict)
    out: str = DEFAULT_OUT
    timings: bool = False

    def __post_init__(self):
        self.nomes = tuple(float(q) for q in self.nomes)
        if not self.nomes:
            raise ConfigError("at least one nome is required")
        for q in self.nomes:
            if not 0.0 < q < 1.0:
                raise ConfigError(f"nome {q} outside (0, 1)")
        if self.samples_per_check is not None and self.samples_per_check < 1:
            raise ConfigError("samples must be >= 1")
        if not 1 <= self.n_max <= state_sum.MAX_ORACLE_N:
            raise ConfigError(f"n_max must lie in 1..{state_sum.MAX_ORACLE_N}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for key, tol in self.tolerances.items():
            if not tol >= 0:
                raise ConfigError(f"tolerance for {key} must be >= 0")

    def samples(self, kind: str) -> int:
        if self.samples_per_check is not None:
            return self.samples_per_check
        return DEFAULT_SAMPLES[kind]


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into :class:`SuiteConfig` keyword arguments.

    Blank lines and ``#`` comments are ignored. ``tolerance.<check> = x``
    sets a per-check tolerance.
    """
    kwargs: dict = {}
    tolerances: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in ("nome", "nomes", "q"):
                kwargs["nomes"] = parse_float_list(value)
            elif key in ("samples", "samples_per_check"):
                kwargs["samples_per_check"] = int(value)
            elif key == "seed":
                kwargs["seed"] = int(value, 0)
            elif key in ("n_max", "n-max"):
                kwargs["n_max"] = int(value)
            elif key == "out":
                kwargs["out"] = value
            elif key == "timings":
                kwargs["timings"] = _parse_bool(value)
            elif key.startswith("tolerance."):
                tolerances[key.split(".", 1)[1]] = float(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if tolerances:
        kwargs["tolerances"] = tolerances
    return kwargs


def load_config(path: str | os.PathLike | None = None, **overrides) -> SuiteConfig:
    """Build a config from an optional file (or ``$OSFACE_CONFIG``) plus overrides.

    Overrides whose value is ``None`` are ignored; the rest win over the file.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    kwargs: dict = {}
    if path is not None:
        try:
            kwargs = parse_config_text(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    tolerances = {**kwargs.pop("tolerances", {}), **(overrides.pop("tolerances", None) or {})}
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SuiteConfig(tolerances=tolerances, **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _group_of(check_name: str) -> str:
    prefix = check_name.split(".", 1)[0]
    for group, prefixes in GROUP_PREFIXES.items():
        if prefix in prefixes:
            return group
    return prefix


@dataclass
class SuiteResult:
    reports: list[VerificationReport]
    rejections: dict[str, Counter]
    notes: list[str]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def summary_rows(self):
        by_name: dict[str, list[VerificationReport]] = defaultdict(list)
        for r in self.reports:
            by_name[r.check_name].append(r)
        for name in sorted(by_name):
            rs = by_name[name]
            yield (name, len(rs), sum(not r.passed for r in rs),
                   max(r.residual for r in rs), max(r.tolerance for r in rs))


class _Runner:
    def __init__(self, config: SuiteConfig):
        self.config = config
        self.reports: list[VerificationReport] = []
        self.rejections: dict[str, Counter] = defaultdict(Counter)
        self.notes: list[str] = []
        self._index: Counter = Counter()

    def tolerance_for(self, name: str, default: float) -> float:
        tols = self.config.tolerances
        for key in (name, name.split(".", 1)[0], _group_of(name)):
            if key in tols:
                return tols[key]
        return default

    def emit(self, report: VerificationReport, elapsed_ns: int, extra: Mapping):
        name = report.check_name
        report = report.with_tolerance(self.tolerance_for(name, report.tolerance))
        report = report.with_params(seed=self.config.seed,
                                    sample_index=self._index[name], **extra)
        if self.config.timings:
            report = _with_elapsed(report, elapsed_ns // 1000)
        self._index[name] += 1
        self.reports.append(report)

    def collect(self, stream: str, count: int, draw: Callable, evaluate: Callable,
                condition: Callable | None = None, tolerance: float | None = None,
                nome_index: int = 0):
        """Draw until ``count`` samples produce reports; see module docstring."""
        rng = make_rng(self.config.seed, stream, nome_index)
        limit = condition_limit(tolerance) if condition is not None else None
        accepted = draws = 0
        budget = MAX_DRAWS_PER_SAMPLE * count + 100
        while accepted < count:
            draws += 1
            if draws > budget:
                raise SamplingError(f"{stream}: only {accepted}/{count} usable samples "
                                    f"in {budget} draws")
            x = draw(rng)
            extra = {}
            try:
                if condition is not None:
                    kappa = condition(x)
                    if not kappa <= limit:
                        self.rejections[stream]["ill_conditioned"] += 1
                        continue
                    extra["condition"] = float(kappa)
                start = time.perf_counter_ns()
                reports = evaluate(x)
                elapsed = time.perf_counter_ns() - start
            except (PoleError, DegenerateSampleError):
                self.rejections[stream]["pole_or_degenerate"] += 1
                continue
            accepted += 1
            if isinstance(reports, VerificationReport):
                reports = (reports,)
            for r in reports:
                self.emit(r, elapsed, extra)

    def per_nome(self):
        for i, q in enumerate(self.config.nomes):
            yield i, theta.EllipticContext(q)


def _with_elapsed(report: VerificationReport, micros: int) -> VerificationReport:
    import dataclasses
    return dataclasses.replace(report, elapsed_micros=int(micros))


# -- groups -----------------------------------------------------------------

def _theta_group(run: _Runner):
    count = run.config.samples("theta")
    for i, ctx in run.per_nome():
        # wider box than the partition-function sampler: one real period, half of tau
        draw = lambda rng, k=1: draw_complex(rng, ctx, k, 0.5, 0.5)
        run.collect("theta.oddness", count, lambda r: draw(r)[0],
                    lambda u: theta.check_oddness(u, ctx), nome_index=i)
        run.collect("theta.quasi_periodicity", count, lambda r: draw(r)[0],
                    lambda u: theta.check_quasi_periodicity(u, ctx), nome_index=i)
        run.collect("theta.half_shift", count, lambda r: draw(r)[0],
                    lambda u: theta.check_half_shift_symmetry(u, ctx), nome_index=i)
        run.collect("theta.addition", count, lambda r: draw(r, 4),
                    lambda a: theta.check_addition_formula(*a, ctx), nome_index=i)


def _pfaffian_reports(x: np.ndarray, tol: float = 1e-10):
    by_elim = pf_by_elimination(x)
    by_def = pf_by_definition(x)
    by_exp = pf_by_expansion(x)
    values = (by_elim, by_def, by_exp)
    spread = max(abs(a - b) for a, b in itertools.combinations(values, 2))
    agreement = relative_residual(spread, *values)
    det = np.linalg.det(x)
    params = {"dim": x.shape[0]}
    return (
        VerificationReport("pfaffian.agreement", by_elim, by_def, agreement, tol, params),
        VerificationReport("pfaffian.square_det", by_elim ** 2, det,
                           relative_residual(by_elim ** 2 - det, by_elim ** 2, det),
                           tol, params),
    )


def _pfaffian_group(run: _Runner):
    count = run.config.samples("pfaffian")
    per_dim = max(1, count // 5)
    for dim in (2, 4, 6, 8, 10):
        run.collect(f"pfaffian.dim{dim}", per_dim, lambda rng, d=dim: random_skew(rng, d),
                    _pfaffian_reports, condition=pf_condition, tolerance=1e-10)


def _ybe_group(run: _Runner):
    for i, ctx in run.per_nome():
        draw4 = lambda rng: draw_complex(rng, ctx, 4)
        draw3 = lambda rng: draw_complex(rng, ctx, 3)
        run.collect("rmatrix.ybe", run.config.samples("ybe"), draw4,
                    lambda a: face_model.check_dynamical_ybe(*a, ctx),
                    condition=lambda a: face_model.ybe_condition(*a, ctx),
                    tolerance=1e-10, nome_index=i)
        run.collect("rmatrix.ice_rule", run.config.samples("ice_rule"), draw3,
                    lambda a: face_model.check_ice_rule(face_model.build_r_matrix(*a, ctx)),
                    nome_index=i)
        run.collect("rmatrix.h_periodicity", run.config.samples("h_periodicity"), draw3,
                    lambda a: face_model.check_height_periodicity(*a, ctx), nome_index=i)


def _reflection_group(run: _Runner):
    count = run.config.samples("reflection")

    def sweep(shift):
        for i, ctx in run.per_nome():
            run.collect("reflection", count, lambda rng: draw_complex(rng, ctx, 3),
                        lambda a: face_model.check_reflection_equation(
                            *a, ctx, inner_shift=shift), nome_index=i)

    start = len(run.reports)
    sweep(0.0)
    if all(r.passed for r in run.reports[start:]):
        run.notes.append("reflection: the literal form (no height shifts) holds")
        return
    run.notes.append("reflection: the literal form FAILS; testing height-shifted variants")
    for shift in (0.5,):
        before = len(run.reports)
        sweep(shift)
        ok = all(r.passed for r in run.reports[before:])
        run.notes.append(f"reflection: inner height shift {shift:+g} "
                         f"{'holds' if ok else 'fails'}")


def _oracle_group(run: _Runner):
    cfg = run.config
    for i, ctx in run.per_nome():
        run.collect("oracle.two_site", cfg.samples("two_site"),
                    lambda rng: draw_point(rng, 1, ctx),
                    lambda p: state_sum.check_two_site_closed_form(p, ctx), nome_index=i)
        if cfg.n_max >= 2:
            # the state sum is not symmetric term by term, so every swap gets its own bound
            run.collect("oracle.symmetry", cfg.samples("symmetry"),
                        lambda rng: draw_point(rng, 2, ctx),
                        lambda p: [state_sum.check_symmetry(p, a, b, ctx)
                                   for a, b in itertools.combinations(range(4), 2)],
                        condition=lambda p: max(
                            oracle_condition(p.swapped(a, b), ctx)
                            for a, b in itertools.combinations(range(4), 2)),
                        tolerance=1e-10,
                        nome_index=i)
        for n in range(1, min(2, cfg.n_max) + 1):
            def cond(p, ctx=ctx):
                return max(oracle_condition(p, ctx),
                           oracle_condition(p.replace_u(0, p.u[0] + ctx.tau), ctx))
            run.collect(f"oracle.quasi_periodicity.n{n}", cfg.samples("oracle_period"),
                        lambda rng, n=n: draw_point(rng, n, ctx),
                        lambda p: state_sum.check_quasi_periodicity_P(p, ctx),
                        condition=cond, tolerance=1e-9, nome_index=i)


def _recursion_group(run: _Runner):
    cfg = run.config
    kinds = (
        ("frozen_rows", state_sum.check_recursion_frozen_rows, 0.0),
        ("frozen_corner", state_sum.check_recursion_frozen_corner, 0.5),
    )
    for i, ctx in run.per_nome():
        for n in range(2, min(3, cfg.n_max) + 1):
            for name, check, offset in kinds:
                for ell in range(1, 2 * n):
                    def cond(p, ell=ell, offset=offset, ctx=ctx):
                        special = p.replace_u(0, -p.u[ell] - offset)
                        return max(oracle_condition(special, ctx),
                                   oracle_condition(special.without(0, ell), ctx))
                    run.collect(f"recursion.{name}.n{n}.l{ell}", cfg.samples("recursion"),
                                lambda rng, n=n: draw_point(rng, n, ctx),
                                lambda p, ell=ell, check=check: check(p, ell, ctx),
                                condition=cond, tolerance=1e-10, nome_index=i)


def _formulas_group(run: _Runner):
    cfg = run.config
    for i, ctx in run.per_nome():
        for n in range(1, min(3, cfg.n_max) + 1):
            run.collect(f"formulas.closed_forms.n{n}", cfg.samples("closed_forms"),
                        lambda rng, n=n: draw_point(rng, n, ctx),
                        lambda p: formulas.check_closed_forms(p, ctx),
                        condition=lambda p: formulas.closed_form_condition(p, ctx),
                        tolerance=1e-9, nome_index=i)
        e_condition = lambda p, ctx=ctx: pf_condition(formulas.kernel(p.u, p.h, ctx)[1])
        for n in range(2, min(3, cfg.n_max) + 1):
            run.collect(f"formulas.first_row.n{n}", cfg.samples("first_row"),
                        lambda rng, n=n: draw_point(rng, n, ctx),
                        lambda p: formulas.check_first_row_expansion(p, ctx),
                        condition=e_condition, tolerance=1e-10, nome_index=i)

            def period_condition(p, ctx=ctx, e_condition=e_condition):
                return max(e_condition(p), e_condition(p.replace_u(0, p.u[0] + ctx.tau)))
            run.collect(f"formulas.factor_period.n{n}", cfg.samples("factor_period"),
                        lambda rng, n=n: draw_point(rng, n, ctx),
                        lambda p: formulas.check_factor_periodicities(p, ctx),
                        condition=period_condition, tolerance=1e-10, nome_index=i)


def _identity_group(run: _Runner):
    cfg = run.config
    for i, ctx in run.per_nome():
        for n in range(1, cfg.n_max + 1):
            draw = lambda rng, n=n: draw_point(rng, n, ctx)
            run.collect(f"identity.two_pfaffians.n{n}", cfg.samples("identity"), draw,
                        lambda p: formulas.check_pfaffian_identity(p, ctx),
                        condition=lambda p: formulas.identity_condition(p.u, p.h, ctx),
                        tolerance=1e-8, nome_index=i)
            run.collect(f"identity.factorizations.n{n}", cfg.samples("factorization"), draw,
                        lambda p: formulas.check_factorizations(p, ctx),
                        condition=lambda p: formulas.factorization_condition(p.u, ctx),
                        tolerance=1e-9, nome_index=i)
            run.collect(f"identity.zero_height.n{n}", cfg.samples("zero_height"), draw,
                        lambda p: formulas.check_identity_at_zero_height(p, ctx),
                        condition=lambda p: formulas.factorization_condition(p.u, ctx),
                        tolerance=1e-9, nome_index=i)


def _appendix_group(run: _Runner):
    for i, ctx in run.per_nome():
        run.collect("appendix", run.config.samples("appendix"),
                    lambda rng: draw_point(rng, 2, ctx),
                    lambda p: formulas.check_appendix_chain(p.u, p.h, ctx), nome_index=i)


_GROUP_RUNNERS = {
    "theta": _theta_group,
    "pfaffian": _pfaffian_group,
    "ybe": _ybe_group,
    "reflection": _reflection_group,
    "oracle": _oracle_group,
    "recursion": _recursion_group,
    "formulas": _formulas_group,
    "identity": _identity_group,
    "appendix": _appendix_group,
}


def run_suite(config: SuiteConfig, groups: Iterable[str] = ("all",)) -> SuiteResult:
    """Run the selected check groups (``"all"`` for every group, in order)."""
    groups = list(groups)
    selected = list(GROUPS) if "all" in groups else groups
    unknown = [g for g in selected if g not in _GROUP_RUNNERS]
    if unknown:
        raise ConfigError(f"unknown check group(s): {', '.join(unknown)}")
    run = _Runner(config)
    for group in GROUPS:
        if group in selected:
            log.info("running %s checks", group)
            _GROUP_RUNNERS[group](run)
    reports = sorted(run.reports, key=lambda r: (r.check_name, r.params["sample_index"]))
    return SuiteResult(reports, dict(run.rejections), run.notes)


def write_report(result: SuiteResult, path: str | os.PathLike):
    """One JSON object per line, ordered by ``(check_name, sample_index)``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in result.reports:
            fh.write(r.to_json())
            fh.write("\n")

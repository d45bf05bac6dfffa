"""Monte-Carlo size and power experiments.

An :class:`ExperimentSpec` fixes two models, a protocol and a list of
tests.  Replication ``r`` simulates its two samples from seeds derived
from ``(master_seed, r)``, and every test in the replication sees the same
data and the same bootstrap seed, so tests are compared on paired draws.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable

import numpy as np

from ._seeding import check_seed, derive_seed
from .curves import ModelSpec, make_grid, simulate_sample
from .ddplot import DEFAULT_NULL_SCHEME, NULL_SCHEMES, DDPlotTest
from .depth import make_depth
from .flores import FloresTest

logger = logging.getLogger(__name__)

BUILTIN_MODELS = {
    0: ModelSpec("peak32", 0.0, 0.3, 3.33),
    1: ModelSpec("peak32", 1.0, 0.3, 3.33),
    2: ModelSpec("peak32", 0.5, 0.3, 3.33),
    3: ModelSpec("peak12", 0.0, 0.3, 3.33),
    4: ModelSpec("peak12", 0.0, 0.5, 5.0),
    5: ModelSpec("peak32", 0.0, 0.5, 5.0),
}

CSV_HEADER = ["pair", "test", "replications", "rejections", "rate", "mean_p_adjusted"]


class SpecError(ValueError):
    """Invalid experiment specification; the message names the field."""


def builtin_model(model_id: int) -> ModelSpec:
    try:
        return BUILTIN_MODELS[int(model_id)]
    except (KeyError, ValueError, TypeError):
        raise ValueError(f"unknown model {model_id!r}; built-in models are 0-5") from None


@dataclass(frozen=True)
class TestConfig:
    """One test to run in every replication.

    ``kind`` is ``"ddplot"`` or ``"flores"``; ``method`` the depth tag.
    """

    __test__ = False

    name: str
    kind: str = "ddplot"
    method: str = "fd2"
    num_boot: int = 250
    alpha: float = 0.05
    null_scheme: str = DEFAULT_NULL_SCHEME
    depth_params: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.kind not in ("ddplot", "flores"):
            raise SpecError(f"tests.{self.name}.kind: expected 'ddplot' or 'flores', got {self.kind!r}")
        if self.kind == "ddplot" and self.null_scheme not in NULL_SCHEMES:
            raise SpecError(f"tests.{self.name}.null_scheme: expected one of {NULL_SCHEMES}")
        if int(self.num_boot) != self.num_boot or self.num_boot < 50:
            raise SpecError(f"tests.{self.name}.num_boot: must be an integer >= 50, got {self.num_boot}")
        if not 0 < self.alpha < 1:
            raise SpecError(f"tests.{self.name}.alpha: must be in (0, 1), got {self.alpha}")
        try:
            make_depth(self.method, **self.depth_params)
        except (ValueError, TypeError) as exc:
            raise SpecError(f"tests.{self.name}.method: {exc}") from None

    def build(self, seed: int):
        depth = make_depth(self.method, **self.depth_params)
        if self.kind == "flores":
            return FloresTest(depth, self.alpha, self.num_boot, seed)
        return DDPlotTest(depth, self.alpha, self.num_boot, self.null_scheme, seed)

    def key(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


STANDARD_TESTS = {
    "DD-FM": TestConfig("DD-FM", "ddplot", "fm"),
    "DD-RP": TestConfig("DD-RP", "ddplot", "rp"),
    "DD-FD2": TestConfig("DD-FD2", "ddplot", "fd2"),
    "Flores": TestConfig("Flores", "flores", "fm"),
}


def standard_tests(names: Iterable[str] = STANDARD_TESTS, num_boot: int = 250, alpha: float = 0.05):
    return [replace(STANDARD_TESTS[name], num_boot=num_boot, alpha=alpha) for name in names]


@dataclass(frozen=True)
class ExperimentSpec:
    model_a: ModelSpec
    model_b: ModelSpec
    tests: tuple = tuple(STANDARD_TESTS.values())
    n_per_sample: int = 50
    grid_size: int = 30
    replications: int = 100
    master_seed: int = 0
    pair: str = ""

    def __post_init__(self):
        if int(self.replications) != self.replications or self.replications < 1:
            raise SpecError(f"replications: must be an integer >= 1, got {self.replications}")
        if int(self.n_per_sample) != self.n_per_sample or self.n_per_sample < 2:
            raise SpecError(f"n_per_sample: must be an integer >= 2, got {self.n_per_sample}")
        if int(self.grid_size) != self.grid_size or self.grid_size < 2:
            raise SpecError(f"grid_size: must be an integer >= 2, got {self.grid_size}")
        if not self.tests:
            raise SpecError("tests: at least one test is required")
        names = [t.name for t in self.tests]
        if len(set(names)) != len(names):
            raise SpecError(f"tests: duplicate test names in {names}")
        try:
            check_seed(self.master_seed)
        except ValueError as exc:
            raise SpecError(f"master_seed: {exc}") from None
        object.__setattr__(self, "tests", tuple(self.tests))
        if not self.pair:
            object.__setattr__(self, "pair", "a-vs-b")


@dataclass
class PowerRow:
    pair: str
    test: str
    replications: int
    rejections: int
    rate: float
    mean_p_adjusted: float
    attempted: int = 0
    homogeneous: bool = False


@dataclass
class PowerTable:
    rows: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def extend(self, other: PowerTable) -> None:
        self.rows.extend(other.rows)

    def row(self, pair: str, test: str) -> PowerRow:
        for r in self.rows:
            if r.pair == pair and r.test == test:
                return r
        raise KeyError((pair, test))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow([r.pair, r.test, r.replications, r.rejections,
                             format(r.rate, ".17g"), format(r.mean_p_adjusted, ".17g")])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for r in self.rows:
            d = asdict(r)
            if not math.isfinite(d["mean_p_adjusted"]):
                d["mean_p_adjusted"] = None
            rows.append(d)
        return json.dumps({"rows": rows}, indent=2)

    def summary(self) -> dict:
        """Per-test average/maximum size and average/minimum power.

        Sizes come from rows whose two models are identical, powers from
        the others.
        """
        out = {}
        for test in dict.fromkeys(r.test for r in self.rows):
            rows = [r for r in self.rows if r.test == test and r.replications > 0]
            size = [r for r in rows if r.homogeneous]
            power = [r for r in rows if not r.homogeneous]
            entry = {}
            if size:
                entry["average_size"] = float(np.mean([r.rate for r in size]))
                entry["maximum_size"] = max(r.rate for r in size)
            if power:
                worst = min(power, key=lambda r: r.rate)
                entry["average_power"] = float(np.mean([r.rate for r in power]))
                entry["minimum_power"] = worst.rate
                entry["minimum_power_pair"] = worst.pair
            out[test] = entry
        return out


def _default_jobs() -> int:
    env = os.environ.get("FDHOMOG_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_replication(spec: ExperimentSpec, r: int, cache):
    grid = make_grid(0.0, 1.0, spec.grid_size)
    results = {}
    pending = []
    for test in spec.tests:
        key = (spec.model_a, spec.model_b, spec.n_per_sample, spec.grid_size,
               spec.master_seed, r, test.key())
        if cache is not None and key in cache:
            results[test.name] = cache[key]
        else:
            pending.append((test, key))
    if not pending:
        return results
    try:
        a = simulate_sample(spec.model_a, spec.n_per_sample, grid, derive_seed(spec.master_seed, r, 0))
        b = simulate_sample(spec.model_b, spec.n_per_sample, grid, derive_seed(spec.master_seed, r, 1))
    except Exception as exc:
        logger.warning("%s replication %d: simulation failed: %s", spec.pair, r, exc)
        return results
    boot_seed = derive_seed(spec.master_seed, r, 2)
    for test, key in pending:
        try:
            res = test.build(boot_seed).fit(a, b).result_
        except Exception as exc:
            logger.warning("%s replication %d, %s failed: %s", spec.pair, r, test.name, exc)
            continue
        outcome = (bool(res.reject), float(res.p_adjusted))
        results[test.name] = outcome
        if cache is not None:
            cache[key] = outcome
    return results


def run_experiment(spec: ExperimentSpec, n_jobs: int | None = None, cache=None) -> PowerTable:
    """Run all replications of ``spec`` and tally rejections per test.

    Args:
        spec: experiment to run.
        n_jobs: worker threads (default: ``FDHOMOG_THREADS`` or all cores).
            The table does not depend on it.
        cache: optional mutable mapping of per-replication outcomes,
            shared between calls so overlapping experiments (identical
            models, protocol, seed and test) are not recomputed.
    """
    n_jobs = _default_jobs() if n_jobs is None else max(1, int(n_jobs))
    reps = range(int(spec.replications))
    if n_jobs == 1:
        per_rep = [_run_replication(spec, r, cache) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            per_rep = list(pool.map(lambda r: _run_replication(spec, r, cache), reps))
    homogeneous = spec.model_a == spec.model_b
    table = PowerTable()
    for test in spec.tests:
        outcomes = [rep[test.name] for rep in per_rep if test.name in rep]
        done = len(outcomes)
        rejections = sum(o[0] for o in outcomes)
        mean_p = float(np.mean([o[1] for o in outcomes])) if done else math.nan
        rate = rejections / done if done else math.nan
        table.rows.append(PowerRow(spec.pair, test.name, done, rejections, rate, mean_p,
                                   attempted=len(per_rep), homogeneous=homogeneous))
    return table


def _protocol_spec(model_a, model_b, pair, protocol) -> ExperimentSpec:
    return ExperimentSpec(model_a, model_b, pair=pair, **protocol)


def delta_sweep(base: ModelSpec, deltas, n_jobs=None, cache=None, **protocol) -> PowerTable:
    """Compare ``base`` (with delta 0) against ``base`` shifted by each delta.

    ``protocol`` holds the remaining :class:`ExperimentSpec` fields.
    """
    deltas = list(deltas)
    if not deltas:
        raise ValueError("deltas must be non-empty")
    ref = replace(base, delta=0.0)
    table = PowerTable()
    for d in deltas:
        spec = _protocol_spec(ref, replace(base, delta=float(d)), f"delta={d:g}", protocol)
        table.extend(run_experiment(spec, n_jobs, cache))
    return table


def m_sweep(base_k: float, m_values, base: ModelSpec | None = None, n_jobs=None, cache=None,
            **protocol) -> PowerTable:
    """Compare amplitude ``base_k`` against ``base_k * m`` for each ``m``.

    All other model parameters come from ``base`` (default: model 0).
    """
    m_values = list(m_values)
    if not m_values or any(not m > 0 for m in m_values):
        raise ValueError("m_values must be non-empty and positive")
    base = builtin_model(0) if base is None else base
    ref = replace(base, amp=float(base_k))
    table = PowerTable()
    for m in m_values:
        spec = _protocol_spec(ref, replace(base, amp=float(base_k) * float(m)), f"m={m:g}", protocol)
        table.extend(run_experiment(spec, n_jobs, cache))
    return table


# -- experiment files ----------------------------------------------------------

PROTOCOL_FIELDS = ("n_per_sample", "grid_size", "replications", "master_seed")


def _parse_model(value, where: str) -> tuple[ModelSpec, str]:
    if isinstance(value, bool):
        raise SpecError(f"{where}: expected a model id or object")
    if isinstance(value, int):
        try:
            return builtin_model(value), str(value)
        except ValueError as exc:
            raise SpecError(f"{where}: {exc}") from None
    if isinstance(value, dict):
        unknown = set(value) - {"mean", "delta", "amp", "rate"}
        if unknown:
            raise SpecError(f"{where}: unknown fields {sorted(unknown)}")
        try:
            spec = ModelSpec(**value)
        except (ValueError, TypeError) as exc:
            raise SpecError(f"{where}: {exc}") from None
        return spec, f"{spec.mean}/d{spec.delta:g}/k{spec.amp:g}/c{spec.rate:g}"
    raise SpecError(f"{where}: expected a model id or object, got {value!r}")


def _parse_test(obj, i: int) -> TestConfig:
    if isinstance(obj, str):
        if obj not in STANDARD_TESTS:
            raise SpecError(f"tests[{i}]: unknown standard test {obj!r}; choose from {sorted(STANDARD_TESTS)}")
        return STANDARD_TESTS[obj]
    if not isinstance(obj, dict) or "name" not in obj:
        raise SpecError(f"tests[{i}]: expected a standard test name or an object with a 'name'")
    allowed = {"name", "kind", "method", "num_boot", "alpha", "null_scheme", "depth_params"}
    unknown = set(obj) - allowed
    if unknown:
        raise SpecError(f"tests[{i}]: unknown fields {sorted(unknown)}")
    try:
        return TestConfig(**obj)
    except TypeError as exc:
        raise SpecError(f"tests[{i}]: {exc}") from None


def parse_experiment(obj: dict) -> list[ExperimentSpec]:
    """Build experiments from a JSON-compatible dict.

    Either ``model_a``/``model_b`` or a ``pairs`` list (``[a, b]`` items)
    is required.  Models are built-in ids (0-5) or objects with
    ``mean``, ``delta``, ``amp`` and ``rate``.  ``tests`` lists standard
    test names or test objects; ``num_boot`` and ``alpha`` at top level
    override the defaults of standard tests.
    """
    if not isinstance(obj, dict):
        raise SpecError("spec: expected a JSON object")
    allowed = {"pairs", "model_a", "model_b", "tests", "num_boot", "alpha", "name", *PROTOCOL_FIELDS}
    unknown = set(obj) - allowed
    if unknown:
        raise SpecError(f"spec: unknown fields {sorted(unknown)}")
    if "pairs" in obj:
        if "model_a" in obj or "model_b" in obj:
            raise SpecError("pairs: give either 'pairs' or 'model_a'/'model_b', not both")
        pairs = obj["pairs"]
        if not isinstance(pairs, list) or not pairs:
            raise SpecError("pairs: expected a non-empty list")
    elif "model_a" in obj and "model_b" in obj:
        pairs = [[obj["model_a"], obj["model_b"]]]
    else:
        raise SpecError("model_a/model_b: required when 'pairs' is absent")

    tests_obj = obj.get("tests", list(STANDARD_TESTS))
    if not isinstance(tests_obj, list) or not tests_obj:
        raise SpecError("tests: expected a non-empty list")
    tests = []
    for i, t in enumerate(tests_obj):
        cfg = _parse_test(t, i)
        if isinstance(t, str):
            overrides = {k: obj[k] for k in ("num_boot", "alpha") if k in obj}
            try:
                cfg = replace(cfg, **overrides)
            except TypeError as exc:
                raise SpecError(f"tests[{i}]: {exc}") from None
        tests.append(cfg)

    protocol = {}
    for name in PROTOCOL_FIELDS:
        if name in obj:
            value = obj[name]
            if isinstance(value, bool) or not isinstance(value, int):
                raise SpecError(f"{name}: expected an integer, got {value!r}")
            protocol[name] = value

    specs = []
    for i, item in enumerate(pairs):
        if not isinstance(item, list) or len(item) != 2:
            raise SpecError(f"pairs[{i}]: expected [model_a, model_b]")
        a, la = _parse_model(item[0], f"pairs[{i}][0]")
        b, lb = _parse_model(item[1], f"pairs[{i}][1]")
        specs.append(ExperimentSpec(a, b, tuple(tests), pair=f"{la}v{lb}", **protocol))
    return specs


def load_experiment_file(path) -> list[ExperimentSpec]:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec: invalid JSON ({exc})") from None
    return parse_experiment(obj)


def run_experiments(specs, n_jobs=None, cache=None) -> PowerTable:
    table = PowerTable()
    for spec in specs:
        table.extend(run_experiment(spec, n_jobs, cache))
    return table

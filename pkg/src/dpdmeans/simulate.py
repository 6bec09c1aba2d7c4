"""Monte Carlo level and power studies under optional contamination.

For every total sample size ``n`` in the grid the first sample has
``n1 = floor(w n) + 1`` observations from ``N(mu1, sigma^2)``; the second has
``n2 = n - n1`` observations drawn from the mixture
``(1 - rate) N(mu2, sigma^2) + rate N(c_mu, c_sigma^2)``.  Each configured
test is run on the same pair of samples and rejects when its p-value falls
below the nominal level.

Random numbers come from Philox substreams keyed by
``(master_seed, n, replication, population)``, so a replication's data do not
depend on which worker runs it or in what order.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .classical import ks_test, pooled_t_test, trimmed_t_test, wilcoxon_test
from .dpdtest import dpd_test
from .errors import ConvergenceError, DomainError
from .mdpde import Sample, SolverConfig

__all__ = [
    "TestSpec",
    "SimulationConfig",
    "CellResult",
    "SimulationReport",
    "rng_stream",
    "sample_population",
    "split_sizes",
    "run_level_power_study",
]

METHODS = ("dpd", "pooled-t", "trimmed-t", "wilcoxon", "ks")


@dataclass(frozen=True)
class TestSpec:
    """One test to run in a study.

    Text form: ``dpd:0.1`` (beta = gamma = 0.1), ``dpd:0.1:0.3`` (beta, gamma),
    ``pooled-t``, ``trimmed-t`` or ``trimmed-t:0.2``, ``wilcoxon``, ``ks``.
    """

    __test__ = False  # keep pytest from collecting this class

    method: str
    beta: float | None = None
    gamma: float | None = None
    trim: float = 0.2

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown test method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.method == "dpd":
            if self.beta is None:
                raise DomainError("a dpd test needs a beta value")
            if self.gamma is None:
                object.__setattr__(self, "gamma", self.beta)

    @classmethod
    def parse(cls, text):
        parts = text.strip().split(":")
        method = parts[0].strip().lower()
        try:
            nums = [float(p) for p in parts[1:]]
        except ValueError:
            raise DomainError(f"cannot parse test specification {text!r}") from None
        if method == "dpd":
            if not 1 <= len(nums) <= 2:
                raise DomainError(f"dpd test needs 'dpd:beta' or 'dpd:beta:gamma', got {text!r}")
            return cls("dpd", nums[0], nums[1] if len(nums) == 2 else None)
        if method == "trimmed-t":
            return cls(method, trim=nums[0]) if nums else cls(method)
        if nums:
            raise DomainError(f"{method} takes no parameters, got {text!r}")
        return cls(method)

    @property
    def name(self):
        if self.method == "dpd":
            if self.gamma == self.beta:
                return f"dpd:{self.beta:g}"
            return f"dpd:{self.beta:g}:{self.gamma:g}"
        if self.method == "trimmed-t":
            return f"trimmed-t:{self.trim:g}"
        return self.method

    def p_value(self, x, y, solver=None):
        if self.method == "dpd":
            return dpd_test(x, y, self.beta, self.gamma, solver).p_value
        if self.method == "pooled-t":
            return pooled_t_test(x, y).p_value
        if self.method == "trimmed-t":
            return trimmed_t_test(x, y, self.trim).p_value
        if self.method == "wilcoxon":
            return wilcoxon_test(x, y).p_value
        return ks_test(x, y).p_value


@dataclass(frozen=True)
class SimulationConfig:
    total_n_grid: tuple
    mu1: float = 0.0
    mu2: float = 0.0
    w: float = 0.6
    sigma: float = 1.0
    contamination_rate: float = 0.0
    contamination_mu: float = -10.0
    contamination_sigma: float = 1.0
    replications: int = 1000
    nominal_alpha: float = 0.05
    tests: tuple = (TestSpec("pooled-t"), TestSpec("dpd", 0.1))
    master_seed: int = 0

    def __post_init__(self):
        grid = tuple(int(n) for n in self.total_n_grid)
        object.__setattr__(self, "total_n_grid", grid)
        for name in ("mu1", "mu2", "w", "sigma", "contamination_rate", "contamination_mu",
                     "contamination_sigma", "nominal_alpha"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        tests = tuple(t if isinstance(t, TestSpec) else TestSpec.parse(t) for t in self.tests)
        object.__setattr__(self, "tests", tests)
        if not grid:
            raise DomainError("total_n_grid must not be empty")
        if not 0.0 < self.w < 1.0:
            raise DomainError(f"w must lie in (0, 1), got {self.w}")
        if not self.sigma > 0 or not self.contamination_sigma > 0:
            raise DomainError("sigma and contamination_sigma must be positive")
        if not 0.0 <= self.contamination_rate < 1.0:
            raise DomainError(f"contamination_rate must lie in [0, 1), got {self.contamination_rate}")
        if self.replications < 1:
            raise DomainError(f"replications must be at least 1, got {self.replications}")
        if not 0.0 < self.nominal_alpha < 1.0:
            raise DomainError(f"nominal_alpha must lie in (0, 1), got {self.nominal_alpha}")
        if not tests:
            raise DomainError("at least one test is required")
        for n in grid:
            split_sizes(n, self.w)

    def to_dict(self):
        d = asdict(self)
        d["total_n_grid"] = list(self.total_n_grid)
        d["tests"] = [t.name for t in self.tests]
        return d

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown configuration field(s): {', '.join(sorted(unknown))}")
        if "total_n_grid" not in data:
            raise DomainError("configuration field 'total_n_grid' is required")
        kwargs = dict(data)
        if "tests" in kwargs:
            kwargs["tests"] = tuple(kwargs["tests"])
        return cls(**kwargs)


@dataclass(frozen=True)
class CellResult:
    test: str
    n: int
    n1: int
    n2: int
    replications: int
    effective: int
    excluded: int
    rejections: int

    @property
    def rate(self):
        return self.rejections / self.effective if self.effective else math.nan

    @property
    def mc_se(self):
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.effective) if self.effective else math.nan


@dataclass(frozen=True)
class SimulationReport:
    config: SimulationConfig
    cells: tuple = field(default=())

    def cell(self, test, n):
        for c in self.cells:
            if c.test == test and c.n == n:
                return c
        raise KeyError((test, n))

    def rate(self, test, n):
        return self.cell(test, n).rate

    def to_csv(self):
        """CSV text, preceded by ``#`` lines carrying the version and configuration."""
        lines = [
            f"# dpdmeans {__version__}",
            "# config " + json.dumps(self.config.to_dict(), sort_keys=True),
            "test,n,n1,n2,replications,effective,excluded,rejections,rate,mc_se",
        ]
        for c in self.cells:
            lines.append(
                f"{c.test},{c.n},{c.n1},{c.n2},{c.replications},{c.effective},{c.excluded},"
                f"{c.rejections},{c.rate!r},{c.mc_se!r}"
            )
        return "\n".join(lines) + "\n"


def split_sizes(n, w):
    """Sample sizes ``(n1, n2)`` with ``n1 = floor(w n) + 1``."""
    n1 = int(math.floor(w * n)) + 1
    n2 = n - n1
    if n1 < 2 or n2 < 2:
        raise DomainError(f"total size {n} with w={w} gives n1={n1}, n2={n2}; both must be at least 2")
    return n1, n2


def rng_stream(master_seed, replication_index, population_index, cell_index=0):
    """Independent, reproducible generator for one population of one replication.

    ``cell_index`` separates studies at different sample sizes; the
    simulation engine passes the total sample size.
    """
    seq = np.random.SeedSequence(
        int(master_seed), spawn_key=(int(cell_index), int(replication_index), int(population_index))
    )
    return np.random.Generator(np.random.Philox(seq))


def sample_population(n, mu, sigma, contamination_rate, c_mu, c_sigma, rng, label=""):
    """Draw ``n`` observations from a two-component normal mixture.

    Each observation independently comes from ``N(c_mu, c_sigma^2)`` with
    probability ``contamination_rate`` and from ``N(mu, sigma^2)`` otherwise.
    """
    if not 0.0 <= contamination_rate <= 1.0:
        raise DomainError(f"contamination_rate must lie in [0, 1], got {contamination_rate}")
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    flip = rng.random(n) < contamination_rate
    clean = rng.normal(mu, sigma, n)
    dirty = rng.normal(c_mu, c_sigma, n)
    return Sample(np.where(flip, dirty, clean), label)


def _replicate(cfg, n, rep, solver):
    """Rejection indicators (1, 0, or None when excluded) for one replication."""
    n1, n2 = split_sizes(n, cfg.w)
    x = sample_population(n1, cfg.mu1, cfg.sigma, 0.0, cfg.contamination_mu,
                          cfg.contamination_sigma, rng_stream(cfg.master_seed, rep, 0, n), "x")
    y = sample_population(n2, cfg.mu2, cfg.sigma, cfg.contamination_rate, cfg.contamination_mu,
                          cfg.contamination_sigma, rng_stream(cfg.master_seed, rep, 1, n), "y")
    out = []
    for t in cfg.tests:
        try:
            out.append(int(t.p_value(x, y, solver) < cfg.nominal_alpha))
        except (ConvergenceError, DomainError):
            out.append(None)
    return out


def _run_chunk(args):
    cfg, n, start, stop = args
    solver = SolverConfig()
    return n, start, [_replicate(cfg, n, rep, solver) for rep in range(start, stop)]


def run_level_power_study(cfg, workers=1, chunk_size=50):
    """Run the study and collect per-(test, n) rejection rates.

    Replications whose test raises a convergence or domain error are left
    out of that test's rate and counted in ``excluded``.  The report does not
    depend on ``workers`` or ``chunk_size``.
    """
    jobs = [
        (cfg, n, start, min(start + chunk_size, cfg.replications))
        for n in cfg.total_n_grid
        for start in range(0, cfg.replications, chunk_size)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, jobs))
    else:
        chunks = [_run_chunk(job) for job in jobs]

    outcomes = {n: [None] * cfg.replications for n in cfg.total_n_grid}
    for n, start, rows in chunks:
        outcomes[n][start:start + len(rows)] = rows

    cells = []
    for j, t in enumerate(cfg.tests):
        for n in cfg.total_n_grid:
            n1, n2 = split_sizes(n, cfg.w)
            col = [row[j] for row in outcomes[n]]
            kept = [v for v in col if v is not None]
            cells.append(CellResult(t.name, n, n1, n2, cfg.replications, len(kept),
                                    len(col) - len(kept), int(sum(kept))))
    return SimulationReport(cfg, tuple(cells))

"""Stochastic gradient push and D-PSGD on synthetic decentralized problems.

Node ``i`` holds row ``i`` of the parameter matrix. SGP mixes ``x`` and the
push-sum weights ``w`` with a column-stochastic matrix and evaluates gradients
at the de-biased ``z = x / w``; D-PSGD mixes with a symmetric doubly stochastic
matrix and evaluates gradients at ``x`` directly. Every run is accounted in
transmission slots: one iteration costs ``tau`` slots.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import AsymmetricInput, ConfigError, Diverged
from .graphs import BaseTopology
from .mixing import MixingMatrix, metropolis_hastings, uniform_column_stochastic
from .schedule import schedule_digraph
from .theory import ProblemConstants
from .topologies import GeneratorSpec

DIVERGENCE_LOSS = 1e12
TRACE_HEADER = ["iter", "slots", "grad_norm_sq", "running_avg_grad_norm_sq", "consensus_err", "loss"]


@dataclass(frozen=True, eq=False)
class LocalProblem:
    """One node's objective.

    quadratic: ``f_i(x) = 0.5 * ||A x - b||^2`` with ``A`` d x d and ``b`` a d-vector.
    logistic: mean logistic loss over rows of ``A`` (features) with labels
    ``b`` in {-1, +1}, plus ``0.5 * reg * ||x||^2``.
    """

    kind: str
    A: np.ndarray
    b: np.ndarray
    noise_sigma: float = 0.0
    seed: int = 0
    reg: float = 0.0

    def __post_init__(self):
        if self.kind not in ("quadratic", "logistic"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def loss(self, x: np.ndarray) -> float:
        if self.kind == "quadratic":
            r = self.A @ x - self.b
            return 0.5 * float(r @ r)
        margins = self.b * (self.A @ x)
        return float(np.mean(np.logaddexp(0.0, -margins))) + 0.5 * self.reg * float(x @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "quadratic":
            return self.A.T @ (self.A @ x - self.b)
        margins = self.b * (self.A @ x)
        coef = -self.b * _sigmoid(-margins) / len(self.b)
        return self.A.T @ coef + self.reg * x


def _sigmoid(u):
    return 0.5 * (1.0 + np.tanh(0.5 * u))


class ProblemSet:
    """The node problems stacked for vectorized gradient evaluation."""

    def __init__(self, problems):
        if isinstance(problems, ProblemSet):
            problems = problems.problems
        self.problems = list(problems)
        if not self.problems:
            raise ValueError("at least one local problem is required")
        kinds = {p.kind for p in self.problems}
        if len(kinds) != 1:
            raise ValueError("all local problems must share one kind")
        self.kind = kinds.pop()
        dims = {p.dim for p in self.problems}
        if len(dims) != 1:
            raise ValueError("all local problems must share one dimension")
        self.n = len(self.problems)
        self.d = dims.pop()
        self.A = np.stack([p.A for p in self.problems])
        self.b = np.stack([p.b for p in self.problems])
        self.reg = np.array([p.reg for p in self.problems])
        self.sigmas = np.array([p.noise_sigma for p in self.problems])
        self.seeds = [p.seed for p in self.problems]

    def grads(self, X: np.ndarray) -> np.ndarray:
        """Row ``i`` is the exact gradient of ``f_i`` at ``X[i]``."""
        if X.shape != (self.n, self.d):
            raise ValueError(f"expected a {self.n}x{self.d} parameter matrix, got {X.shape}")
        if self.kind == "quadratic":
            r = np.einsum("nij,nj->ni", self.A, X) - self.b
            return np.einsum("nij,ni->nj", self.A, r)
        margins = self.b * np.einsum("nmj,nj->nm", self.A, X)
        coef = -self.b * _sigmoid(-margins) / self.b.shape[1]
        return np.einsum("nmj,nm->nj", self.A, coef) + self.reg[:, None] * X

    def global_loss(self, x: np.ndarray) -> float:
        return float(np.mean([p.loss(x) for p in self.problems]))

    def global_grad(self, x: np.ndarray) -> np.ndarray:
        return self.grads(np.broadcast_to(x, (self.n, self.d))).mean(axis=0)

    def minimizer(self) -> np.ndarray:
        """Global minimizer: closed form for quadratics, Newton's method for logistic."""
        if self.kind == "quadratic":
            H = np.einsum("nij,nik->jk", self.A, self.A)
            g = np.einsum("nij,ni->j", self.A, self.b)
            return np.linalg.lstsq(H, g, rcond=None)[0]
        x = np.zeros(self.d)
        for _ in range(100):
            g = self.global_grad(x)
            if np.linalg.norm(g) < 1e-13:
                break
            H = np.zeros((self.d, self.d))
            for p in self.problems:
                s = _sigmoid(p.b * (p.A @ x))
                H += (p.A.T * (s * (1 - s))) @ p.A / len(p.b) + p.reg * np.eye(self.d)
            x = x - np.linalg.solve(H / self.n, g)
        return x


class CounterNoise:
    """Gaussian gradient noise drawn from a stream keyed by ``(seed, node, t)``.

    The draw for a node at an iteration does not depend on the order in which
    nodes or iterations are evaluated.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def sample(self, node: int, t: int, d: int) -> np.ndarray:
        return np.random.default_rng([self.seed, node, t]).standard_normal(d)

    def matrix(self, sigmas: np.ndarray, t: int, d: int) -> np.ndarray:
        out = np.zeros((len(sigmas), d))
        for i, s in enumerate(sigmas):
            if s > 0:
                out[i] = s * self.sample(i, t, d)
        return out


def _stochastic_grads(ps: ProblemSet, X, t, noise):
    g = ps.grads(X)
    if noise is not None and ps.sigmas.any():
        g = g + noise.matrix(ps.sigmas, t, ps.d)
    return g


@dataclass(frozen=True, eq=False)
class SgpState:
    x: np.ndarray
    w: np.ndarray
    t: int = 0

    @classmethod
    def start(cls, x0: np.ndarray) -> "SgpState":
        x0 = np.array(x0, dtype=float)
        return cls(x0, np.ones(x0.shape[0]), 0)

    @property
    def x_bar(self) -> np.ndarray:
        return self.x.mean(axis=0)


def debias(state: SgpState) -> np.ndarray:
    """``z_i = x_i / w_i``."""
    if not np.all(state.w > 0):
        raise ValueError("push-sum weights must stay positive")
    return state.x / state.w[:, None]


def sgp_step(state: SgpState, w_mat: MixingMatrix, problems, eta: float, noise: CounterNoise | None = None) -> SgpState:
    """One push-sum SGD iteration: local step at ``z``, then mix ``x`` and ``w``."""
    ps = problems if isinstance(problems, ProblemSet) else ProblemSet(problems)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    W = w_mat.weights
    if W.shape != (state.x.shape[0],) * 2:
        raise ValueError(f"mixing matrix is {W.shape} but there are {state.x.shape[0]} nodes")
    z = debias(state)
    g = _stochastic_grads(ps, z, state.t, noise)
    return SgpState(W @ (state.x - eta * g), W @ state.w, state.t + 1)


def _check_doubly_stochastic(w_mat: MixingMatrix, tol: float = 1e-12):
    if not w_mat.is_symmetric(tol):
        raise AsymmetricInput("D-PSGD needs a symmetric mixing matrix")
    if not w_mat.is_column_stochastic(tol):
        raise AsymmetricInput("D-PSGD needs a doubly stochastic mixing matrix")


def dpsgd_step(x: np.ndarray, w_mat: MixingMatrix, problems, eta: float, noise: CounterNoise | None = None, t: int = 0) -> np.ndarray:
    """One D-PSGD iteration: local step at ``x``, then mix."""
    _check_doubly_stochastic(w_mat)
    ps = problems if isinstance(problems, ProblemSet) else ProblemSet(problems)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    g = _stochastic_grads(ps, x, t, noise)
    return w_mat.weights @ (x - eta * g)


def measure_constants(problems, sample_points: int, rng, x0: np.ndarray | None = None, spread: float = 1.0) -> ProblemConstants:
    """Assumption constants of a quadratic problem set.

    ``zeta2`` is the largest heterogeneity ``(1/n) sum_i ||grad f_i - grad f||^2``
    over ``sample_points`` points drawn around the minimizer, so it is an
    empirical estimate. ``x0`` (one shared start, default zero) fixes ``f0``.
    """
    ps = ProblemSet(problems)
    if ps.kind != "quadratic":
        raise ValueError("exact constants are available for quadratic problems only")
    L = max(float(np.linalg.eigvalsh(a.T @ a)[-1]) for a in ps.A)
    x_star = ps.minimizer()
    x0 = np.zeros(ps.d) if x0 is None else np.asarray(x0, dtype=float)
    zeta2 = 0.0
    for _ in range(max(1, sample_points)):
        x = x_star + spread * rng.standard_normal(ps.d)
        g = ps.grads(np.broadcast_to(x, (ps.n, ps.d)))
        zeta2 = max(zeta2, float(np.mean(np.sum((g - g.mean(axis=0)) ** 2, axis=1))))
    sigma2 = ps.d * float(ps.sigmas.max()) ** 2
    return ProblemConstants(
        L=L,
        sigma2=sigma2,
        zeta2=zeta2,
        n=ps.n,
        f0=ps.global_loss(x0),
        f_star=ps.global_loss(x_star),
        x0_max_norm=float(np.linalg.norm(x0)),
    )


def make_problems(n: int, spec: dict, seed: int) -> list[LocalProblem]:
    """Synthetic local problems with node-specific offsets.

    quadratic keys: ``d``, ``zeta`` (size of the per-node ``b`` offsets),
    ``spread`` (per-node curvature perturbation), ``b_scale`` (shared part of
    ``b``), ``noise_sigma``. logistic keys: ``d``, ``samples``, ``zeta``
    (per-node feature shift), ``reg``, ``noise_sigma``.
    """
    kind = spec.get("kind", "quadratic")
    d = int(spec.get("d", 10))
    sigma = float(spec.get("noise_sigma", 0.0))
    zeta = float(spec.get("zeta", 0.005))
    rng = np.random.default_rng([seed, 7])
    out = []
    if kind == "quadratic":
        spread = float(spec.get("spread", 0.1))
        common = float(spec.get("b_scale", 0.05)) * rng.standard_normal(d)
        for i in range(n):
            A = np.eye(d) + spread * rng.standard_normal((d, d)) / math.sqrt(d)
            b = common + zeta * rng.standard_normal(d)
            out.append(LocalProblem("quadratic", A, b, sigma, seed * 1_000_003 + i))
    elif kind == "logistic":
        m = int(spec.get("samples", 20))
        reg = float(spec.get("reg", 0.1))
        truth = rng.standard_normal(d)
        for i in range(n):
            feats = rng.standard_normal((m, d)) + zeta * rng.standard_normal(d)
            labels = np.where(feats @ truth + 0.5 * rng.standard_normal(m) >= 0, 1.0, -1.0)
            out.append(LocalProblem("logistic", feats, labels, sigma, seed * 1_000_003 + i, reg))
    else:
        raise ConfigError(f"unknown problem kind {kind!r}")
    return out


@dataclass
class Trace:
    arm: str
    tau: int
    eps: float
    iters: list[int] = field(default_factory=list)
    slots: list[int] = field(default_factory=list)
    grad_norm_sq: list[float] = field(default_factory=list)
    running_avg: list[float] = field(default_factory=list)
    consensus_err: list[float] = field(default_factory=list)
    loss: list[float] = field(default_factory=list)
    reached: bool = False
    _sum: float = field(default=0.0, repr=False)

    def __len__(self):
        return len(self.iters)

    def record(self, grad_sq: float, cons: float, loss: float) -> float:
        t = len(self.iters)
        self._sum = (self._sum if t else 0.0) + grad_sq
        avg = self._sum / (t + 1)
        self.iters.append(t)
        self.slots.append((t + 1) * self.tau)
        self.grad_norm_sq.append(grad_sq)
        self.running_avg.append(avg)
        self.consensus_err.append(cons)
        self.loss.append(loss)
        return avg

    @property
    def iterations(self) -> int | None:
        """Iterations needed to meet the criterion, or None if it was not met."""
        return len(self.iters) if self.reached else None

    @property
    def total_slots(self) -> int | None:
        return self.slots[-1] if self.reached else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(TRACE_HEADER)
        for row in zip(self.iters, self.slots, self.grad_norm_sq, self.running_avg, self.consensus_err, self.loss):
            wr.writerow([row[0], row[1]] + [repr(float(v)) for v in row[2:]])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def _run(arm, ps: ProblemSet, w_mat: MixingMatrix, tau: int, x0, eta, eps, max_iters, noise, push_sum: bool) -> Trace:
    trace = Trace(arm, tau, eps)
    if push_sum:
        state = SgpState.start(x0)
    else:
        _check_doubly_stochastic(w_mat)
        x = np.array(x0, dtype=float)
    W = w_mat.weights
    for t in range(max_iters):
        if push_sum:
            xs, z = state.x, debias(state)
        else:
            xs = z = x
        x_bar = xs.mean(axis=0)
        loss = ps.global_loss(x_bar)
        if not math.isfinite(loss) or loss > DIVERGENCE_LOSS:
            raise Diverged(f"{arm}: loss {loss:.3e} at iteration {t}", trace)
        gbar = ps.global_grad(x_bar)
        cons = float(np.max(np.linalg.norm(z - x_bar, axis=1)))
        if trace.record(float(gbar @ gbar), cons, loss) <= eps:
            trace.reached = True
            break
        g = _stochastic_grads(ps, z, t, noise)
        if push_sum:
            state = SgpState(W @ (state.x - eta * g), W @ state.w, t + 1)
        else:
            x = W @ (x - eta * g)
    return trace


ALGORITHMS = ("sgp", "dpsgd")
GRAPHS = ("designed", "base")


@dataclass
class ExperimentConfig:
    """One simulation run. Exactly one of ``topology`` (edge-list file) and ``gen`` is set."""

    seed: int
    eps: float
    topology: str | None = None
    gen: str | None = None
    algorithm: str = "sgp"
    graph: str | None = None
    K: int | None = None
    k_max: int = 10
    skip_step4: bool = False
    problem: dict = field(default_factory=dict)
    eta: float | None = None
    T_planned: int | None = None
    max_iters: int = 10_000
    x0_scale: float = 0.0
    out: str | None = None

    def __post_init__(self):
        if (self.topology is None) == (self.gen is None):
            raise ConfigError("exactly one of 'topology' and 'gen' must be given")
        if self.seed is None:
            raise ConfigError("'seed' is required")
        if not (isinstance(self.eps, (int, float)) and self.eps > 0):
            raise ConfigError("'eps' must be a positive number")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"'algorithm' must be one of {ALGORITHMS}")
        if self.graph is None:
            self.graph = "designed" if self.algorithm == "sgp" else "base"
        if self.graph not in GRAPHS:
            raise ConfigError(f"'graph' must be one of {GRAPHS}")
        if self.algorithm == "dpsgd" and self.graph == "designed":
            raise ConfigError("D-PSGD runs on the base topology only (designed graphs are directed)")
        if self.max_iters < 1:
            raise ConfigError("'max_iters' must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key in ("seed", "eps"):
            if key not in data:
                raise ConfigError(f"missing required config field {key!r}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data)

    def base_topology(self) -> BaseTopology:
        if self.topology is not None:
            return BaseTopology.from_file(self.topology)
        return GeneratorSpec.parse(self.gen).build()

    def step_size(self, n: int) -> float:
        if self.eta is not None:
            return float(self.eta)
        return math.sqrt(n / (self.T_planned or self.max_iters))


@dataclass
class Setup:
    """Everything a run needs that does not depend on the arm's algorithm."""

    base: BaseTopology
    problems: ProblemSet
    x0: np.ndarray
    base_tau: int
    design: object = None


def prepare(config: ExperimentConfig, need_design: bool = True) -> Setup:
    from .design import design_graph, sweep_k

    base = config.base_topology()
    ps = ProblemSet(make_problems(base.n, config.problem, config.seed))
    x0 = config.x0_scale * np.random.default_rng([config.seed, 11]).standard_normal((base.n, ps.d))
    base_tau = schedule_digraph(base.as_digraph(), base).tau
    result = None
    if need_design:
        if config.K is None:
            result = sweep_k(base, config.k_max, config.skip_step4).best
        else:
            result = design_graph(base, config.K, config.skip_step4)
    return Setup(base, ps, x0, base_tau, result)


ARMS = {
    "sgp-designed": ("sgp", "designed"),
    "dpsgd-vanilla": ("dpsgd", "base"),
    "sgp-vanilla": ("sgp", "base"),
}


def run_arm(config: ExperimentConfig, setup: Setup, arm: str) -> Trace:
    algorithm, graph = ARMS[arm]
    if graph == "designed":
        w_mat, tau = uniform_column_stochastic(setup.design.g_a), setup.design.tau
    elif algorithm == "dpsgd":
        w_mat, tau = metropolis_hastings(setup.base), setup.base_tau
    else:
        w_mat, tau = uniform_column_stochastic(setup.base.as_digraph()), setup.base_tau
    noise = CounterNoise(config.seed) if setup.problems.sigmas.any() else None
    return _run(
        arm,
        setup.problems,
        w_mat,
        tau,
        setup.x0,
        config.step_size(setup.base.n),
        config.eps,
        config.max_iters,
        noise,
        push_sum=algorithm == "sgp",
    )


def run_experiment(config: ExperimentConfig, setup: Setup | None = None) -> Trace:
    arm = next(a for a, v in ARMS.items() if v == (config.algorithm, config.graph))
    if setup is None:
        setup = prepare(config, need_design=config.graph == "designed")
    return run_arm(config, setup, arm)


def compare(config: ExperimentConfig, arms=tuple(ARMS)) -> dict[str, Trace]:
    """Run several arms on one shared topology, problem set and start point."""
    setup = prepare(config, need_design="sgp-designed" in arms)
    return {arm: run_arm(config, setup, arm) for arm in arms}

"""Latent factor model with dual similarity regularization, trained by full-batch gradient descent.

The objective is

    1/2 sum_(i,j) observed (R_ij - U_i . V_j)^2
      + alpha/2 Reg_user(U) + beta/2 Reg_item(V)
      + lambda1/2 ||U||^2 + lambda2/2 ||V||^2

where each Reg is either the average-based penalty (distance of a row to the
similarity-weighted mean of its top-k neighbors) or the individual-based
penalty (sum of S_ij ||x_i - x_j||^2 over stored similarities).
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DivergenceError, SimMFError, ValidationError
from .hin import RatingMatrix
from .metapath import NeighborIndex, SimilarityMatrix

MODES = ("none", "average", "individual")
CHECKPOINT_FORMAT = "simmf-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(eq=False)
class FactorModel:
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=np.float64)
        self.V = np.asarray(self.V, dtype=np.float64)
        if self.U.ndim != 2 or self.V.ndim != 2 or self.U.shape[1] != self.V.shape[1]:
            raise ValidationError(f"incompatible factor shapes {self.U.shape} and {self.V.shape}")
        if self.U.shape[1] < 1:
            raise ValidationError("latent dimension must be >= 1")

    @property
    def d(self) -> int:
        return self.U.shape[1]

    @property
    def m(self) -> int:
        return self.U.shape[0]

    @property
    def n(self) -> int:
        return self.V.shape[0]

    def copy(self) -> "FactorModel":
        return FactorModel(self.U.copy(), self.V.copy())

    def predict_many(self, users, items, clamp: tuple[float, float] | None = None) -> np.ndarray:
        users = np.asarray(users)
        items = np.asarray(items)
        pred = np.einsum("ij,ij->i", self.U[users], self.V[items])
        if clamp is not None:
            pred = np.clip(pred, clamp[0], clamp[1])
        return pred


def predict(model: FactorModel, user: int, item: int) -> float:
    """Unclamped dot product of the user and item factor rows."""
    if not 0 <= user < model.m:
        raise IndexError(f"user index {user} out of range [0, {model.m})")
    if not 0 <= item < model.n:
        raise IndexError(f"item index {item} out of range [0, {model.n})")
    return float(model.U[user] @ model.V[item])


def init_model(m: int, n: int, d: int, seed: int = 0, init_scale: float = 0.1) -> FactorModel:
    rng = np.random.default_rng(seed)
    U = rng.normal(0.0, init_scale, size=(m, d))
    V = rng.normal(0.0, init_scale, size=(n, d))
    return FactorModel(U, V)


@dataclass
class TrainConfig:
    d: int = 10
    eta: float = 0.005
    lambda1: float = 0.001
    lambda2: float = 0.001
    epsilon: float = 1e-4
    max_iters: int = 500
    seed: int = 0
    init_scale: float = 0.1
    step_halving: bool = True
    max_halvings: int = 20

    def __post_init__(self):
        for name in ("eta", "epsilon", "init_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("lambda1", "lambda2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.max_iters < 1 or self.d < 1:
            raise ValueError("max_iters and d must be >= 1")


@dataclass
class RegularizationSpec:
    """Which penalty acts on each side, with its weight and neighbor structure.

    Average mode needs a :class:`NeighborIndex`.  Individual mode takes a
    :class:`SimilarityMatrix` (all stored pairs) or a :class:`NeighborIndex`
    (top-k pairs only).
    """

    user_mode: str = "none"
    item_mode: str = "none"
    alpha: float = 0.0
    beta: float = 0.0
    user_neighbors: NeighborIndex | SimilarityMatrix | None = None
    item_neighbors: NeighborIndex | SimilarityMatrix | None = None

    def __post_init__(self):
        for mode in (self.user_mode, self.item_mode):
            if mode not in MODES:
                raise ValueError(f"regularization mode must be one of {MODES}, got {mode!r}")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")

    @property
    def label(self) -> str:
        short = {"average": "a", "individual": "i"}
        parts = []
        if self.user_mode != "none":
            parts.append(f"U({short[self.user_mode]})")
        if self.item_mode != "none":
            parts.append(f"I({short[self.item_mode]})")
        return "".join(parts) or "none"


# -- regularizers -----------------------------------------------------------------


class _AverageReg:
    """sum_i ||x_i - sum_f A_if x_f||^2 with A the row-normalized top-k weights."""

    def __init__(self, neighbors: NeighborIndex, n: int):
        if not isinstance(neighbors, NeighborIndex):
            raise SimMFError("average-based regularization needs a NeighborIndex")
        w = neighbors.weights
        if w.shape != (n, n):
            raise ValidationError(f"neighbor index has shape {w.shape}, expected {(n, n)}")
        sums = np.asarray(w.sum(axis=1)).ravel()
        self.active = sums > 0
        inv = np.zeros_like(sums)
        inv[self.active] = 1.0 / sums[self.active]
        self.A = sp.csr_matrix(sp.diags(inv) @ w)
        self.At = self.A.T.tocsr()

    def residual(self, X):
        E = X - self.A @ X
        E[~self.active] = 0.0
        return E

    def value(self, X) -> float:
        E = self.residual(X)
        return float(np.sum(E * E))

    def grad(self, X):
        # d/dX of 1/2 * value
        E = self.residual(X)
        return E - self.At @ E


class _IndividualReg:
    """sum_(i,j) S_ij ||x_i - x_j||^2 over stored off-diagonal pairs."""

    def __init__(self, source, n: int):
        if isinstance(source, NeighborIndex):
            mat = source.weights
        elif isinstance(source, SimilarityMatrix):
            mat = source.matrix
        elif sp.issparse(source):
            mat = source
        else:
            raise SimMFError("individual-based regularization needs a similarity matrix or neighbor index")
        if mat.shape != (n, n):
            raise ValidationError(f"similarity has shape {mat.shape}, expected {(n, n)}")
        coo = sp.coo_matrix(mat)
        off = (coo.row != coo.col) & (coo.data != 0)
        self.rows, self.cols, self.w = coo.row[off], coo.col[off], coo.data[off]
        e = len(self.w)
        idx = np.arange(e)
        # incidence: +1 at the row end, -1 at the column end of every pair
        self.B = sp.csr_matrix((np.ones(e), (self.rows, idx)), shape=(n, e)) - \
            sp.csr_matrix((np.ones(e), (self.cols, idx)), shape=(n, e))

    def value(self, X) -> float:
        diff = X[self.rows] - X[self.cols]
        return float(np.sum(self.w * np.sum(diff * diff, axis=1)))

    def grad(self, X):
        # 1/2 d/dX_i = sum_j (S_ij + S_ji)(X_i - X_j)
        diff = X[self.rows] - X[self.cols]
        return np.asarray(self.B @ (self.w[:, None] * diff))


def _make_reg(mode: str, weight: float, neighbors, n: int, side: str):
    if mode == "none" or weight == 0:
        return None
    if neighbors is None:
        raise SimMFError(f"{side} regularization mode {mode!r} needs neighbor structures")
    if mode == "average":
        return _AverageReg(neighbors, n)
    return _IndividualReg(neighbors, n)


class Problem:
    """Precomputed objective/gradient evaluator for one rating set and spec."""

    def __init__(self, ratings: RatingMatrix, reg: RegularizationSpec, lambda1: float, lambda2: float):
        m, n = ratings.shape
        self.shape = (m, n)
        order = np.lexsort((ratings.items, ratings.users))
        self.users = ratings.users[order]
        self.items = ratings.items[order]
        self.values = ratings.values[order]
        base = sp.csr_matrix((np.ones(len(order)), (self.users, self.items)), shape=(m, n))
        base.sort_indices()
        self._indptr, self._indices = base.indptr, base.indices
        self.alpha = reg.alpha if reg.user_mode != "none" else 0.0
        self.beta = reg.beta if reg.item_mode != "none" else 0.0
        self.user_reg = _make_reg(reg.user_mode, self.alpha, reg.user_neighbors, m, "user")
        self.item_reg = _make_reg(reg.item_mode, self.beta, reg.item_neighbors, n, "item")
        self.lambda1 = lambda1
        self.lambda2 = lambda2

    def _check(self, U, V):
        if U.shape[0] != self.shape[0] or V.shape[0] != self.shape[1]:
            raise ValidationError(f"model shapes {U.shape}, {V.shape} do not match ratings {self.shape}")

    def errors(self, U, V):
        return np.einsum("ij,ij->i", U[self.users], V[self.items]) - self.values

    @np.errstate(over="ignore", invalid="ignore")
    def objective(self, U, V) -> float:
        # overflow shows up as a non-finite value, which train() reports as divergence
        self._check(U, V)
        err = self.errors(U, V)
        f = 0.5 * float(err @ err)
        if self.user_reg is not None:
            f += 0.5 * self.alpha * self.user_reg.value(U)
        if self.item_reg is not None:
            f += 0.5 * self.beta * self.item_reg.value(V)
        f += 0.5 * self.lambda1 * float(np.sum(U * U)) + 0.5 * self.lambda2 * float(np.sum(V * V))
        return f

    def gradients(self, U, V):
        self._check(U, V)
        err = self.errors(U, V)
        E = sp.csr_matrix((err, self._indices, self._indptr), shape=self.shape)
        gU = np.asarray(E @ V) + self.lambda1 * U
        gV = np.asarray(E.T @ U) + self.lambda2 * V
        if self.user_reg is not None:
            gU += self.alpha * self.user_reg.grad(U)
        if self.item_reg is not None:
            gV += self.beta * self.item_reg.grad(V)
        return gU, gV


def _lambdas(cfg):
    return (cfg.lambda1, cfg.lambda2) if cfg is not None else (0.0, 0.0)


def objective(model: FactorModel, ratings: RatingMatrix, reg: RegularizationSpec,
              cfg: TrainConfig | None = None) -> float:
    return Problem(ratings, reg, *_lambdas(cfg)).objective(model.U, model.V)


def grad_user(model: FactorModel, ratings: RatingMatrix, reg: RegularizationSpec,
              cfg: TrainConfig | None = None) -> np.ndarray:
    return Problem(ratings, reg, *_lambdas(cfg)).gradients(model.U, model.V)[0]


def grad_item(model: FactorModel, ratings: RatingMatrix, reg: RegularizationSpec,
              cfg: TrainConfig | None = None) -> np.ndarray:
    return Problem(ratings, reg, *_lambdas(cfg)).gradients(model.U, model.V)[1]


# -- training ---------------------------------------------------------------------


@dataclass
class Trace:
    """Per-iteration record of a training run.

    ``objective[t]`` is the objective after iteration t+1; ``initial`` is the
    value at the initial point.
    """

    initial: float = float("nan")
    objective: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    converged: bool = False
    stop_reason: str = ""

    @property
    def iterations(self) -> int:
        return len(self.objective)

    def rows(self):
        yield (0, self.initial, "", "")
        for t, (f, dl, e) in enumerate(zip(self.objective, self.delta, self.eta), start=1):
            yield (t, f, dl, e)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "objective", "delta", "eta"])
            for t, f, dl, e in self.rows():
                w.writerow([t, repr(f), "" if dl == "" else repr(dl), "" if e == "" else repr(e)])


def train(ratings: RatingMatrix, reg: RegularizationSpec, cfg: TrainConfig,
          model: FactorModel | None = None) -> tuple[FactorModel, Trace]:
    """Gradient descent on the full objective until the step is below ``epsilon``.

    With ``cfg.step_halving`` a step that raises the objective is retried
    with half the learning rate (up to ``max_halvings`` times); the next
    iteration starts again from ``cfg.eta``.  If no halving decreases the
    objective the run stops with reason ``"stalled"``.
    """
    m, n = ratings.shape
    if model is None:
        model = init_model(m, n, cfg.d, cfg.seed, cfg.init_scale)
    else:
        model = model.copy()
    prob = Problem(ratings, reg, cfg.lambda1, cfg.lambda2)
    U, V = model.U, model.V
    f = prob.objective(U, V)
    trace = Trace(initial=f)
    if not np.isfinite(f):
        raise DivergenceError("objective is not finite at the initial point", model, trace)

    for _ in range(cfg.max_iters):
        gU, gV = prob.gradients(U, V)
        eta = cfg.eta
        halvings = cfg.max_halvings if cfg.step_halving else 0
        for attempt in range(halvings + 1):
            U1 = U - eta * gU
            V1 = V - eta * gV
            f1 = prob.objective(U1, V1)
            if not cfg.step_halving or (np.isfinite(f1) and f1 <= f):
                break
            if attempt < halvings:
                eta *= 0.5
        else:
            if np.isfinite(f1):
                trace.stop_reason = "stalled"
                break
        if not (np.isfinite(f1) and np.all(np.isfinite(U1)) and np.all(np.isfinite(V1))):
            trace.stop_reason = "diverged"
            raise DivergenceError(f"objective became {f1} at iteration {trace.iterations + 1}",
                                  FactorModel(U, V), trace)
        delta = float(np.sum((U1 - U) ** 2) + np.sum((V1 - V) ** 2))
        U, V, f = U1, V1, f1
        trace.objective.append(f)
        trace.delta.append(delta)
        trace.eta.append(eta)
        if delta < cfg.epsilon:
            trace.converged = True
            trace.stop_reason = "converged"
            break
    else:
        trace.stop_reason = "max_iters"
    return FactorModel(U, V), trace


# -- checkpoints --------------------------------------------------------------------


def save_checkpoint(path, model: FactorModel, config: dict | None = None, checksum: str = "") -> None:
    """Write U, V and a JSON header (format, version, config, dataset checksum) to ``.npz``."""
    header = {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION,
              "config": config or {}, "checksum": checksum}
    np.savez(path, U=model.U, V=model.V, header=np.asarray(json.dumps(header, sort_keys=True)))


def load_checkpoint(path) -> tuple[FactorModel, dict]:
    with np.load(Path(path), allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("format") != CHECKPOINT_FORMAT:
            raise SimMFError(f"{path} is not a {CHECKPOINT_FORMAT} file")
        if header.get("version") != CHECKPOINT_VERSION:
            raise SimMFError(f"unsupported checkpoint version {header.get('version')}")
        return FactorModel(z["U"].copy(), z["V"].copy()), header


def config_dict(cfg: TrainConfig) -> dict:
    return asdict(cfg)

"""Least-squares SVM with a polynomial kernel, and the gesture decision tree.

Training solves the saddle-point system

    [ 0   1^T         ] [ b     ]   [ 0 ]
    [ 1   K + I/gamma ] [ alpha ] = [ y ]

with a dense LU factorisation; the decision value is
``sum_i alpha_i k(x_i, x) + b``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from usgesture.errors import (DimensionMismatchError, InvalidConfigError,
                              LengthMismatchError, OneClassInputError,
                              SingularSystemError)
from usgesture.features import RangeMatrix, RssVector, flatten_features
from usgesture.simulator import GestureKind

MODEL_VERSION = 1
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class KernelParams:
    """Polynomial kernel ``(scale * <a, b> + offset) ** degree``."""

    degree: int = 3
    offset: float = 1.0
    scale: float = 1.0
    kind: str = "polynomial"

    def __post_init__(self):
        if self.kind != "polynomial":
            raise InvalidConfigError(f"unsupported kernel {self.kind!r}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise InvalidConfigError("kernel degree must be a positive integer")
        if not self.scale > 0:
            raise InvalidConfigError("kernel scale must be positive")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "degree": int(self.degree),
                "offset": self.offset, "scale": self.scale}


def kernel_eval(a, b, params: KernelParams) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatchError(f"kernel arguments differ in shape: {a.shape} vs {b.shape}")
    return float((params.scale * np.dot(a, b) + params.offset) ** params.degree)


def kernel_matrix(A, B, params: KernelParams) -> np.ndarray:
    """Gram matrix between the rows of ``A`` and ``B``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise LengthMismatchError(f"feature lengths differ: {A.shape[1]} vs {B.shape[1]}")
    return (params.scale * (A @ B.T) + params.offset) ** params.degree


@dataclass(eq=False)
class LsSvmModel:
    support_inputs: np.ndarray
    alphas: np.ndarray
    bias: float
    kernel: KernelParams
    gamma: float
    labels: np.ndarray
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None
    residual: float = 0.0

    @property
    def n_features(self) -> int:
        return self.support_inputs.shape[1]

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.feature_mean is not None:
            X = (X - self.feature_mean) / self.feature_scale
        return X

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"model expects {self.n_features} features, got {X.shape[1]}")
        K = kernel_matrix(self.transform(X), self.support_inputs, self.kernel)
        return K @ self.alphas + self.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "kernel": self.kernel.to_dict(),
            "gamma": self.gamma,
            "bias": self.bias,
            "alphas": self.alphas.tolist(),
            "labels": self.labels.astype(int).tolist(),
            "support_inputs": self.support_inputs.tolist(),
            "feature_mean": None if self.feature_mean is None else self.feature_mean.tolist(),
            "feature_scale": None if self.feature_scale is None else self.feature_scale.tolist(),
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, data: dict) -> LsSvmModel:
        if data.get("version") != MODEL_VERSION:
            raise InvalidConfigError(f"unsupported model version {data.get('version')!r}")

        def arr(key):
            v = data.get(key)
            return None if v is None else np.asarray(v, dtype=float)

        return cls(
            support_inputs=np.atleast_2d(arr("support_inputs")),
            alphas=arr("alphas"),
            bias=float(data["bias"]),
            kernel=KernelParams(**data["kernel"]),
            gamma=float(data["gamma"]),
            labels=np.asarray(data["labels"], dtype=int),
            feature_mean=arr("feature_mean"),
            feature_scale=arr("feature_scale"),
            residual=float(data.get("residual", 0.0)),
        )


def saddle_system(K: np.ndarray, gamma: float) -> np.ndarray:
    """The ``(n + 1) x (n + 1)`` LS-SVM matrix for Gram matrix ``K``."""
    n = K.shape[0]
    A = np.empty((n + 1, n + 1))
    A[0, 0] = 0.0
    A[0, 1:] = 1.0
    A[1:, 0] = 1.0
    A[1:, 1:] = K + np.eye(n) / gamma
    return A


def lssvm_train(inputs, labels, kernel: KernelParams = KernelParams(),
                gamma: float = 10.0, standardize: bool = False) -> LsSvmModel:
    """Fit a binary LS-SVM on ``labels`` in {-1, +1}.

    With ``standardize`` the per-feature mean and standard deviation of
    ``inputs`` are stored in the model and applied before every kernel
    evaluation.
    """
    X = np.asarray(inputs, dtype=float)
    y = np.asarray(labels)
    if X.ndim != 2:
        raise DimensionMismatchError("inputs must be a list of equal-length vectors")
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError("one label per input vector is required")
    if not np.all(np.isin(y, (-1, 1))):
        raise InvalidConfigError("labels must be -1 or +1")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise OneClassInputError("training data needs examples of both classes")
    if not gamma > 0:
        raise InvalidConfigError("gamma must be positive")

    mean = scale = None
    if standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        X = (X - mean) / scale

    A = saddle_system(kernel_matrix(X, X, kernel), gamma)
    rhs = np.concatenate([[0.0], y.astype(float)])
    try:
        sol = scipy.linalg.solve(A, rhs, assume_a="gen", check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystemError(f"LS-SVM system could not be solved: {exc}") from exc
    residual = float(np.linalg.norm(A @ sol - rhs) / np.linalg.norm(rhs))
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise SingularSystemError(f"LS-SVM system residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    return LsSvmModel(X, sol[1:], float(sol[0]), kernel, float(gamma),
                      y.astype(int), mean, scale, residual)


def lssvm_decide(model: LsSvmModel, x) -> tuple[float, int]:
    """Decision value and label of one vector; a zero score maps to +1."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.n_features:
        raise DimensionMismatchError(
            f"model expects {model.n_features} features, got shape {x.shape}")
    score = float(model.decision_function(x[None, :])[0])
    return score, (1 if score >= 0 else -1)


# -- hierarchy ---------------------------------------------------------------

PUSHES = (GestureKind.FWD, GestureKind.FWD_BWD)
SWIPES = (GestureKind.SWIPE_LTR, GestureKind.SWIPE_RTL)

# node name -> (feature set, positive classes, negative classes)
NODES = {
    "detect": ("rss", PUSHES + SWIPES + (GestureKind.HOLD_HAND,), (GestureKind.NO_GESTURE,)),
    "pushes_vs_rest": ("rss", PUSHES, SWIPES + (GestureKind.HOLD_HAND,)),
    "fwd_vs_fwdbwd": ("range", (GestureKind.FWD,), (GestureKind.FWD_BWD,)),
    "swipes_vs_hold": ("range", SWIPES, (GestureKind.HOLD_HAND,)),
    "ltr_vs_rtl": ("range", (GestureKind.SWIPE_LTR,), (GestureKind.SWIPE_RTL,)),
}


@dataclass(frozen=True)
class HierarchyConfig:
    """Hyper-parameters shared by the five tree nodes.

    ``kernel_scale=None`` sets the kernel scale to ``1 / n_features`` of each
    node so kernel values stay O(1) for standardised inputs.
    """

    degree: int = 3
    gamma: float = 10.0
    kernel_offset: float = 1.0
    kernel_scale: float | None = None
    rss_norm: str = "none"
    range_norm: str = "none"
    standardize: bool = True

    def kernel_for(self, n_features: int) -> KernelParams:
        scale = self.kernel_scale if self.kernel_scale is not None else 1.0 / n_features
        return KernelParams(self.degree, self.kernel_offset, scale)

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: dict) -> HierarchyConfig:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfigError(f"unknown classifier keys: {sorted(unknown)}")
        return cls(**data)


def node_inputs(rss: RssVector, rm: RangeMatrix, config: HierarchyConfig) -> dict[str, np.ndarray]:
    """Flattened vectors for both feature sets of one profile."""
    return {"rss": flatten_features(rss, config.rss_norm)[0],
            "range": flatten_features(rm, config.range_norm)[0]}


@dataclass(eq=False)
class HierarchyModel:
    detect: LsSvmModel
    pushes_vs_rest: LsSvmModel
    fwd_vs_fwdbwd: LsSvmModel
    swipes_vs_hold: LsSvmModel
    ltr_vs_rtl: LsSvmModel
    config: HierarchyConfig = field(default_factory=HierarchyConfig)

    def node(self, name: str) -> LsSvmModel:
        return getattr(self, name)

    def predict_arrays(self, rss_X, range_X) -> list[GestureKind]:
        """Classify many profiles given their flattened feature rows."""
        rss_X = np.atleast_2d(np.asarray(rss_X, dtype=float))
        range_X = np.atleast_2d(np.asarray(range_X, dtype=float))
        if rss_X.shape[0] != range_X.shape[0]:
            raise DimensionMismatchError("feature arrays disagree on the number of profiles")
        lab = {name: self.node(name).predict(rss_X if NODES[name][0] == "rss" else range_X)
               for name in NODES}
        out = []
        for i in range(rss_X.shape[0]):
            if lab["detect"][i] < 0:
                out.append(GestureKind.NO_GESTURE)
            elif lab["pushes_vs_rest"][i] > 0:
                out.append(GestureKind.FWD if lab["fwd_vs_fwdbwd"][i] > 0 else GestureKind.FWD_BWD)
            elif lab["swipes_vs_hold"][i] > 0:
                out.append(GestureKind.SWIPE_LTR if lab["ltr_vs_rtl"][i] > 0
                           else GestureKind.SWIPE_RTL)
            else:
                out.append(GestureKind.HOLD_HAND)
        return out

    def to_dict(self) -> dict:
        return {"version": MODEL_VERSION, "config": self.config.to_dict(),
                "nodes": {name: self.node(name).to_dict() for name in NODES}}

    @classmethod
    def from_dict(cls, data: dict) -> HierarchyModel:
        if data.get("version") != MODEL_VERSION:
            raise InvalidConfigError(f"unsupported model version {data.get('version')!r}")
        nodes = data.get("nodes", {})
        missing = set(NODES) - set(nodes)
        if missing:
            raise InvalidConfigError(f"hierarchy document lacks nodes {sorted(missing)}")
        return cls(**{name: LsSvmModel.from_dict(nodes[name]) for name in NODES},
                   config=HierarchyConfig.from_dict(data.get("config", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> HierarchyModel:
        return cls.from_dict(json.loads(Path(path).read_text()))


def classify_gesture(h: HierarchyModel, rss: RssVector, rm: RangeMatrix) -> GestureKind:
    """Walk the detection/classification tree for one profile."""
    x = node_inputs(rss, rm, h.config)
    return h.predict_arrays(x["rss"][None, :], x["range"][None, :])[0]


def train_hierarchy(rss_X, range_X, labels: Sequence[GestureKind | str],
                    config: HierarchyConfig = HierarchyConfig(),
                    overrides: dict[str, tuple[int, float]] | None = None) -> HierarchyModel:
    """Train all five nodes, each on the profiles that reach it.

    ``rss_X`` and ``range_X`` hold one flattened feature row per profile (see
    :func:`node_inputs`).  ``overrides`` maps node names to a
    ``(degree, gamma)`` pair replacing the config values for that node.
    """
    rss_X = np.asarray(rss_X, dtype=float)
    range_X = np.asarray(range_X, dtype=float)
    y = np.array([GestureKind.parse(g).value for g in labels])
    if not (rss_X.shape[0] == range_X.shape[0] == y.size):
        raise DimensionMismatchError("feature arrays and labels disagree in length")
    nodes = {}
    for name, (kind, pos, neg) in NODES.items():
        X = rss_X if kind == "rss" else range_X
        is_pos = np.isin(y, [g.value for g in pos])
        is_neg = np.isin(y, [g.value for g in neg])
        if not is_pos.any() or not is_neg.any():
            raise OneClassInputError(f"node {name!r} lacks training examples of one side")
        sel = is_pos | is_neg
        node_cfg = config
        if overrides and name in overrides:
            degree, gamma = overrides[name]
            node_cfg = HierarchyConfig(**{**config.to_dict(), "degree": degree, "gamma": gamma})
        nodes[name] = lssvm_train(X[sel], np.where(is_pos[sel], 1, -1),
                                  node_cfg.kernel_for(X.shape[1]), node_cfg.gamma,
                                  standardize=config.standardize)
    return HierarchyModel(**nodes, config=config)

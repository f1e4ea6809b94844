"""Linear least-squares mapping from segment descriptors to divergence."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

SCHEMA_VERSION = 1
HEADER = "audiosum-model"
RIDGE_FACTOR = 1e-8
RANK_RTOL = 1e-10
CONFIG_KEYS = ("sample_rate", "n_fft", "hop", "n_mfcc", "segment_length")


class ModelFormatError(ValueError):
    pass


class ConfigMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RegressionModel:
    weights: np.ndarray
    intercept: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    config: dict = field(default_factory=dict)
    ridge_lambda: float = 0.0
    train_rmse: float = math.nan
    n_rows: int = 0
    schema_version: int = SCHEMA_VERSION

    @property
    def n_features(self):
        return len(self.weights)


def config_echo(config):
    """The slice of a pipeline config a model depends on."""
    return {
        "sample_rate": int(config.sample_rate),
        "n_fft": int(config.n_fft),
        "hop": int(config.hop),
        "n_mfcc": int(config.n_mfcc),
        "segment_length": float(config.segment_length_train),
    }


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite values")


def fit(features, targets, config=None):
    """Fit ``y ~ w . z(x) + b`` where ``z`` standardises each column.

    Solved by column-pivoted QR. If the standardised design is rank
    deficient a light ridge term is added and stored in the model.
    Constant columns get scale 1 and weight 0.
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(targets, dtype=np.float64).ravel()
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"{x.shape[0]} feature rows but {y.shape[0]} targets")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 training rows")
    _check_finite(x, "features")
    _check_finite(y, "targets")

    n, d = x.shape
    means = x.mean(axis=0)
    scales = x.std(axis=0)
    constant = scales <= 1e-12 * np.maximum(1.0, np.abs(means))
    scales[constant] = 1.0
    a = (x - means) / scales
    a[:, constant] = 0.0
    intercept = float(y.mean())
    yc = y - intercept

    active = np.flatnonzero(~constant)
    weights = np.zeros(d)
    ridge = 0.0
    if active.size:
        sub = a[:, active]
        q, r, piv = scipy.linalg.qr(sub, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int(np.sum(diag > RANK_RTOL * diag[0])) if diag.size and diag[0] > 0 else 0
        if rank == active.size:
            w = np.empty(active.size)
            w[piv] = scipy.linalg.solve_triangular(r, q.T @ yc)
        else:
            ridge = RIDGE_FACTOR * float(np.sum(sub**2)) / d
            augmented = np.vstack([sub, math.sqrt(ridge) * np.eye(active.size)])
            rhs = np.concatenate([yc, np.zeros(active.size)])
            q, r = np.linalg.qr(augmented)
            w = scipy.linalg.solve_triangular(r, q.T @ rhs)
        weights[active] = w

    residual = a @ weights + intercept - y
    return RegressionModel(
        weights=weights,
        intercept=intercept,
        feature_means=means,
        feature_scales=scales,
        config=config_echo(config) if config is not None else {},
        ridge_lambda=ridge,
        train_rmse=float(np.sqrt(np.mean(residual**2))),
        n_rows=n,
    )


def check_compatible(model, config):
    """Raise if ``config`` would produce descriptors the model cannot read."""
    expected = model.config.get("n_mfcc")
    if expected is not None and expected != config.n_mfcc:
        raise ConfigMismatchError(
            f"model was trained with n_mfcc={expected}, pipeline uses n_mfcc={config.n_mfcc}"
        )


def predict(model, x, config=None):
    """Affine prediction for one descriptor (1-D) or a batch (2-D)."""
    x = np.asarray(x, dtype=np.float64)
    if config is not None:
        check_compatible(model, config)
    if x.shape[-1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {x.shape[-1]}")
    _check_finite(x, "feature vector")
    z = (x - model.feature_means) / model.feature_scales
    out = z @ model.weights + model.intercept
    return float(out) if np.ndim(out) == 0 else out


def _fmt(v):
    return format(float(v), ".17g")


def dumps(model):
    lines = [
        f"{HEADER} v{model.schema_version}",
        f"n_features {model.n_features}",
        f"n_rows {model.n_rows}",
        f"intercept {_fmt(model.intercept)}",
        f"ridge_lambda {_fmt(model.ridge_lambda)}",
        f"train_rmse {_fmt(model.train_rmse)}",
        "weights " + " ".join(_fmt(v) for v in model.weights),
        "means " + " ".join(_fmt(v) for v in model.feature_means),
        "scales " + " ".join(_fmt(v) for v in model.feature_scales),
        "config " + " ".join(f"{k}={model.config[k]!r}" for k in sorted(model.config)),
        "end",
    ]
    return "\n".join(lines) + "\n"


def save(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))


def _parse_config(text):
    out = {}
    for item in text.split():
        key, sep, value = item.partition("=")
        if not sep:
            raise ModelFormatError(f"bad config item {item!r}")
        out[key] = float(value) if "." in value or "e" in value else int(value)
    return out


def loads(text, config=None):
    lines = text.splitlines()
    if not lines:
        raise ModelFormatError("empty model file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != HEADER or not head[1].startswith("v"):
        raise ModelFormatError(f"not a model file (header {lines[0]!r})")
    try:
        version = int(head[1][1:])
    except ValueError:
        raise ModelFormatError(f"bad schema version {head[1]!r}") from None
    if version != SCHEMA_VERSION:
        raise ModelFormatError(f"unknown schema version {version} (this build reads v{SCHEMA_VERSION})")

    if lines[-1].strip() != "end":
        raise ModelFormatError("model file is truncated (no end marker)")
    fields = {}
    for line in lines[1:-1]:
        if not line.strip():
            continue
        key, _, rest = line.partition(" ")
        fields[key] = rest
    required = ("n_features", "intercept", "weights", "means", "scales", "config")
    missing = [k for k in required if k not in fields]
    if missing:
        raise ModelFormatError(f"model file missing fields: {', '.join(missing)}")
    try:
        d = int(fields["n_features"])
        arrays = {k: np.array([float(v) for v in fields[k].split()]) for k in ("weights", "means", "scales")}
        model = RegressionModel(
            weights=arrays["weights"],
            intercept=float(fields["intercept"]),
            feature_means=arrays["means"],
            feature_scales=arrays["scales"],
            config=_parse_config(fields["config"]),
            ridge_lambda=float(fields.get("ridge_lambda", "0")),
            train_rmse=float(fields.get("train_rmse", "nan")),
            n_rows=int(fields.get("n_rows", "0")),
            schema_version=version,
        )
    except ValueError as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from exc
    for k, arr in arrays.items():
        if arr.shape != (d,):
            raise ModelFormatError(f"field {k} has {arr.size} values, expected {d}")
    if not (np.all(np.isfinite(arrays["weights"])) and np.all(np.isfinite(arrays["means"]))
            and np.all(arrays["scales"] > 0) and math.isfinite(model.intercept)):
        raise ModelFormatError("model parameters must be finite with positive scales")
    if config is not None and model.config:
        current = config_echo(config)
        diffs = {k: (model.config.get(k), current[k]) for k in CONFIG_KEYS if model.config.get(k) != current[k]}
        if diffs:
            warnings.warn(f"model config differs from pipeline config: {diffs}", stacklevel=2)
    return model


def load(path, config=None):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return loads(text, config)

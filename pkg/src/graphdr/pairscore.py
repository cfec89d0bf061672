"""Drug pair scoring: a shared drug encoder, an optional context encoder,
and a small decision head, trained with Adam on binary cross-entropy.

Forward, backward and the optimizer are written out explicitly so the
gradient path can be checked against finite differences and so training
is reproducible from a seed alone.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTrainingSet,
    GraphDRError,
    MissingEmbedding,
    ShapeMismatch,
    UnknownContext,
    UnknownDrug,
)

FEATURE_MODES = ("fp", "dr", "fp+dr")


class Triple(NamedTuple):
    drug_a: str
    drug_b: str
    context: str
    label: int


class TripleDataset:
    """Labeled (drug, drug, context) observations."""

    COLUMNS = ("drug_a", "drug_b", "context", "label")

    def __init__(self, records: list[Triple]):
        self.records = list(records)

    @classmethod
    def from_csv(cls, path) -> "TripleDataset":
        """Read a ``drug_a,drug_b,context,label`` CSV with header."""
        records: list[Triple] = []
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != cls.COLUMNS:
                raise GraphDRError(
                    f"{path}: expected header {','.join(cls.COLUMNS)!r}"
                )
            for rowno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 4:
                    raise GraphDRError(f"{path}:{rowno}: expected 4 columns")
                a, b, c, label = (col.strip() for col in row)
                if label not in ("0", "1"):
                    raise GraphDRError(f"{path}:{rowno}: label must be 0 or 1")
                records.append(Triple(a, b, c, int(label)))
        return cls(records)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(self.COLUMNS)
            writer.writerows(self.records)

    def subset(self, indices) -> "TripleDataset":
        return TripleDataset([self.records[i] for i in indices])

    def drugs(self) -> list[str]:
        """Unique drug ids in first-appearance order."""
        seen: dict[str, None] = {}
        for t in self.records:
            seen.setdefault(t.drug_a)
            seen.setdefault(t.drug_b)
        return list(seen)

    def contexts(self) -> list[str]:
        return sorted({t.context for t in self.records})

    def labels(self) -> np.ndarray:
        return np.array([t.label for t in self.records], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i: int) -> Triple:
        return self.records[i]


@dataclass
class DrugFeatureSet:
    """Per-drug input features: fingerprints and/or embedding rows."""

    fingerprints: dict[str, np.ndarray] = field(default_factory=dict)
    embeddings: dict[str, np.ndarray] | None = None

    def fingerprint_dim(self) -> int:
        return len(next(iter(self.fingerprints.values()))) if self.fingerprints else 0

    def embedding_dim(self) -> int:
        return len(next(iter(self.embeddings.values()))) if self.embeddings else 0


@dataclass
class ContextFeatureSet:
    """Per-context input features."""

    features: dict[str, np.ndarray]

    @classmethod
    def one_hot(cls, context_ids) -> "ContextFeatureSet":
        """Indicator features over the sorted unique context ids."""
        ids = sorted(set(context_ids))
        eye = np.eye(len(ids))
        return cls({cid: eye[i] for i, cid in enumerate(ids)})

    @classmethod
    def from_csv(cls, path) -> "ContextFeatureSet":
        """Read ``context,<f1>,...`` rows; the first line is a header."""
        features: dict[str, np.ndarray] = {}
        width = None
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or header[0].strip() != "context":
                raise GraphDRError(f"{path}: expected a 'context,...' header")
            for rowno, row in enumerate(reader, start=2):
                if not row:
                    continue
                cid = row[0].strip()
                try:
                    vec = np.array([float(v) for v in row[1:]], dtype=np.float64)
                except ValueError:
                    raise GraphDRError(f"{path}:{rowno}: non-numeric feature") from None
                if width is None:
                    width = len(vec)
                elif len(vec) != width:
                    raise DimensionMismatch(
                        f"{path}:{rowno}: {len(vec)} features, expected {width}"
                    )
                features[cid] = vec
        if not features:
            raise GraphDRError(f"{path}: no context rows")
        return cls(features)

    @property
    def dim(self) -> int:
        return len(next(iter(self.features.values())))


def _drug_vector(drugs: DrugFeatureSet, drug_id: str, mode: str) -> np.ndarray:
    has_fp = drug_id in drugs.fingerprints
    has_emb = drugs.embeddings is not None and drug_id in drugs.embeddings
    if not has_fp and not has_emb:
        raise UnknownDrug(f"no features for drug {drug_id!r}")
    parts = []
    if mode in ("fp", "fp+dr"):
        if not has_fp:
            raise UnknownDrug(f"no fingerprint for drug {drug_id!r}")
        parts.append(drugs.fingerprints[drug_id])
    if mode in ("dr", "fp+dr"):
        if not has_emb:
            raise MissingEmbedding(f"no embedding for drug {drug_id!r}")
        parts.append(drugs.embeddings[drug_id])
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def assemble_input(
    triple: Triple,
    drugs: DrugFeatureSet,
    contexts: ContextFeatureSet | None,
    mode: str,
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Input vectors (xa, xb, xc) for one triple; xc is None without contexts."""
    if mode not in FEATURE_MODES:
        raise ValueError(f"unknown feature mode {mode!r}")
    xa = _drug_vector(drugs, triple.drug_a, mode)
    xb = _drug_vector(drugs, triple.drug_b, mode)
    if contexts is None:
        return xa, xb, None
    try:
        xc = contexts.features[triple.context]
    except KeyError:
        raise UnknownContext(f"no features for context {triple.context!r}") from None
    return xa, xb, xc


def build_design(triples, drugs, contexts, mode):
    """Stack assembled inputs into design matrices plus the label vector."""
    xa_rows, xb_rows, xc_rows, labels = [], [], [], []
    for t in triples:
        xa, xb, xc = assemble_input(t, drugs, contexts, mode)
        xa_rows.append(xa)
        xb_rows.append(xb)
        if xc is not None:
            xc_rows.append(xc)
        labels.append(t.label)
    n = len(labels)
    if n == 0:
        drug_dim = 0
        ctx = None if contexts is None else np.zeros((0, contexts.dim))
        return (
            np.zeros((0, drug_dim)),
            np.zeros((0, drug_dim)),
            ctx,
            np.zeros(0),
        )
    xa_mat = np.vstack(xa_rows)
    xb_mat = np.vstack(xb_rows)
    xc_mat = np.vstack(xc_rows) if contexts is not None else None
    return xa_mat, xb_mat, xc_mat, np.array(labels, dtype=np.float64)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    positive = x >= 0
    e = np.exp(np.where(positive, -x, x))
    return np.where(positive, 1.0 / (1.0 + e), e / (1.0 + e))


def bce_from_logit(logit, y):
    """Elementwise binary cross-entropy evaluated from the logit.

    max(l, 0) - l*y + log(1 + e^{-|l|}) never exponentiates a positive
    argument, so saturated scores stay finite.
    """
    logit = np.asarray(logit, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.maximum(logit, 0.0) - logit * y + np.log1p(np.exp(-np.abs(logit)))


def bce_loss(y_hat, y):
    """Binary cross-entropy for probabilities in (0, 1)."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    logit = np.log(y_hat) - np.log1p(-y_hat)
    return bce_from_logit(logit, y)


class Dense:
    """Linear layer; weights He-uniform in fan-in, bias zero."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        limit = np.sqrt(6.0 / n_in)
        self.W = rng.uniform(-limit, limit, size=(n_in, n_out))
        self.b = np.zeros(n_out)


@dataclass
class PairScorerConfig:
    """Architecture and optimization settings."""

    feature_mode: str = "fp+dr"
    use_context: bool = True
    encoder_channels: int = 128
    hidden_channels: tuple[int, ...] = (32, 32, 32)
    dropout: float = 0.5
    epochs: int = 250
    batch_size: int = 8192
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.99
    eps: float = 1e-7
    weight_decay: float = 1e-5
    both_orders: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature mode {self.feature_mode!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be at least 1")


class PairScorer:
    """Encoder-decoder scorer over (drug, drug, context) inputs.

    The two drug inputs pass through one shared encoder; hidden layers
    use ReLU with inverted dropout during training, the output is a
    sigmoid probability.
    """

    def __init__(
        self,
        drug_dim: int,
        context_dim: int,
        config: PairScorerConfig,
        rng: np.random.Generator,
    ):
        if drug_dim < 1:
            raise ValueError("drug feature dimension must be at least 1")
        if config.use_context and context_dim < 1:
            raise ValueError("context feature dimension must be at least 1")
        self.config = config
        self.drug_dim = drug_dim
        self.context_dim = context_dim if config.use_context else 0
        k = config.encoder_channels
        self.drug_encoder = Dense(drug_dim, k, rng)
        self.context_encoder = Dense(context_dim, k, rng) if config.use_context else None
        head_in = k * (3 if config.use_context else 2)
        dims = (head_in, *config.hidden_channels, 1)
        self.head = [Dense(a, b, rng) for a, b in zip(dims, dims[1:])]

    def parameters(self) -> list[np.ndarray]:
        """Flat parameter list; backward returns gradients in this order."""
        params = [self.drug_encoder.W, self.drug_encoder.b]
        if self.context_encoder is not None:
            params += [self.context_encoder.W, self.context_encoder.b]
        for layer in self.head:
            params += [layer.W, layer.b]
        return params

    def _check_shapes(self, xa, xb, xc):
        if xa.ndim != 2 or xb.ndim != 2 or xa.shape != xb.shape:
            raise ShapeMismatch("drug inputs must be equal-shape 2-d arrays")
        if xa.shape[1] != self.drug_dim:
            raise ShapeMismatch(
                f"drug input width {xa.shape[1]}, model expects {self.drug_dim}"
            )
        if self.context_encoder is None:
            if xc is not None:
                raise ShapeMismatch("model was built without a context encoder")
        else:
            if xc is None or xc.ndim != 2 or xc.shape[0] != xa.shape[0]:
                raise ShapeMismatch("context input missing or batch size differs")
            if xc.shape[1] != self.context_dim:
                raise ShapeMismatch(
                    f"context input width {xc.shape[1]}, model expects {self.context_dim}"
                )

    def forward(self, xa, xb, xc=None, train=False, rng=None):
        """Probabilities for a batch; also returns the backprop cache.

        With ``train`` set, dropout masks are drawn from ``rng`` and the
        surviving activations are scaled by 1/(1-rate); at inference the
        activations pass through unchanged.
        """
        xa = np.asarray(xa, dtype=np.float64)
        xb = np.asarray(xb, dtype=np.float64)
        xc = None if xc is None else np.asarray(xc, dtype=np.float64)
        self._check_shapes(xa, xb, xc)
        rate = self.config.dropout if train else 0.0
        if rate > 0.0 and rng is None:
            raise ValueError("training-mode forward needs an rng for dropout")

        def hidden(layer: Dense, x: np.ndarray) -> tuple[np.ndarray, tuple]:
            pre = x @ layer.W + layer.b
            act = _relu(pre)
            mask = None
            if rate > 0.0:
                mask = (rng.random(act.shape) >= rate) / (1.0 - rate)
                act = act * mask
            return act, (x, pre, mask)

        ha, cache_a = hidden(self.drug_encoder, xa)
        hb, cache_b = hidden(self.drug_encoder, xb)
        parts = [ha, hb]
        cache_c = None
        if self.context_encoder is not None:
            hc, cache_c = hidden(self.context_encoder, xc)
            parts.append(hc)
        h = np.concatenate(parts, axis=1)
        head_caches = []
        for layer in self.head[:-1]:
            h, c = hidden(layer, h)
            head_caches.append(c)
        logit = (h @ self.head[-1].W + self.head[-1].b)[:, 0]
        cache = {
            "a": cache_a,
            "b": cache_b,
            "c": cache_c,
            "head": head_caches,
            "out_in": h,
            "logit": logit,
        }
        return _sigmoid(logit), cache

    def backward(self, cache, y) -> list[np.ndarray]:
        """Gradients of the mean batch cross-entropy, evaluated from the
        forward cache; order matches :meth:`parameters`."""
        y = np.asarray(y, dtype=np.float64)
        logit = cache["logit"]
        batch = logit.shape[0]
        dlogit = ((_sigmoid(logit) - y) / batch)[:, None]

        out = self.head[-1]
        d_out_W = cache["out_in"].T @ dlogit
        d_out_b = dlogit.sum(axis=0)
        dh = dlogit @ out.W.T

        head_grads = [(d_out_W, d_out_b)]
        for layer, (x, pre, mask) in zip(
            reversed(self.head[:-1]), reversed(cache["head"])
        ):
            if mask is not None:
                dh = dh * mask
            dz = dh * (pre > 0.0)
            head_grads.append((x.T @ dz, dz.sum(axis=0)))
            dh = dz @ layer.W.T
        head_grads.reverse()

        k = self.config.encoder_channels

        def encoder_grads(branch_cache, d_branch):
            x, pre, mask = branch_cache
            if mask is not None:
                d_branch = d_branch * mask
            dz = d_branch * (pre > 0.0)
            return x.T @ dz, dz.sum(axis=0)

        dWa, dba = encoder_grads(cache["a"], dh[:, :k])
        dWb, dbb = encoder_grads(cache["b"], dh[:, k : 2 * k])
        grads = [dWa + dWb, dba + dbb]
        if self.context_encoder is not None:
            dWc, dbc = encoder_grads(cache["c"], dh[:, 2 * k : 3 * k])
            grads += [dWc, dbc]
        for gW, gb in head_grads:
            grads += [gW, gb]
        return grads


@dataclass
class AdamState:
    """First/second moment estimates, one pair per parameter array."""

    learning_rate: float
    beta1: float
    beta2: float
    eps: float
    weight_decay: float
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params, *, learning_rate, beta1, beta2, eps, weight_decay):
        return cls(
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            weight_decay=weight_decay,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
    """One bias-corrected Adam update, in place.

    Weight decay is added to the gradient before the moment updates.
    """
    if len(params) != len(state.m) or len(params) != len(grads):
        raise ShapeMismatch("parameter, gradient and state lengths differ")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**state.step
    bias2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if state.weight_decay:
            g = g + state.weight_decay * p
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + state.eps)


def train_pairscore(
    train_triples,
    drugs: DrugFeatureSet,
    contexts: ContextFeatureSet | None,
    config: PairScorerConfig,
    val_triples=None,
):
    """Train a scorer on the given triples.

    Returns (model, history) where history holds the per-epoch mean
    training loss and, when ``val_triples`` is given, a matching list of
    validation AUROC values.
    """
    records = list(train_triples)
    if not records:
        raise EmptyTrainingSet("no training triples")
    ctx = contexts if config.use_context else None
    xa, xb, xc, y = build_design(records, drugs, ctx, config.feature_mode)
    if config.both_orders:
        xa, xb = np.vstack([xa, xb]), np.vstack([xb, xa])
        xc = None if xc is None else np.vstack([xc, xc])
        y = np.concatenate([y, y])
    init_seed, stream_seed = np.random.SeedSequence(config.seed).spawn(2)
    model = PairScorer(
        xa.shape[1],
        xc.shape[1] if xc is not None else 0,
        config,
        np.random.default_rng(init_seed),
    )
    rng = np.random.default_rng(stream_seed)
    params = model.parameters()
    state = AdamState.for_params(
        params,
        learning_rate=config.learning_rate,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
        weight_decay=config.weight_decay,
    )
    n = xa.shape[0]
    val_design = None
    if val_triples is not None:
        val_records = list(val_triples)
        val_design = build_design(val_records, drugs, ctx, config.feature_mode)
    history: dict[str, list[float]] = {"train_loss": []}
    if val_design is not None:
        history["val_auroc"] = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            batch_c = None if xc is None else xc[idx]
            _, cache = model.forward(xa[idx], xb[idx], batch_c, train=True, rng=rng)
            loss_sum += float(bce_from_logit(cache["logit"], y[idx]).sum())
            grads = model.backward(cache, y[idx])
            adam_step(state, params, grads)
        history["train_loss"].append(loss_sum / n)
        if val_design is not None:
            from .evaluation import auroc  # local import to avoid a cycle

            va, vb, vc, vy = val_design
            scores = _predict_design(model, va, vb, vc)
            history["val_auroc"].append(auroc(scores, vy))
    return model, history


def _predict_design(model: PairScorer, xa, xb, xc, batch_size: int = 8192) -> np.ndarray:
    if xa.shape[0] == 0:
        return np.zeros(0)
    chunks = []
    for start in range(0, xa.shape[0], batch_size):
        sl = slice(start, start + batch_size)
        probs, _ = model.forward(
            xa[sl], xb[sl], None if xc is None else xc[sl], train=False
        )
        chunks.append(probs)
    return np.concatenate(chunks)


def predict(
    model: PairScorer,
    triples,
    drugs: DrugFeatureSet,
    contexts: ContextFeatureSet | None,
) -> np.ndarray:
    """Scores in (0, 1) for each triple, in input order."""
    ctx = contexts if model.config.use_context else None
    xa, xb, xc, _ = build_design(list(triples), drugs, ctx, model.config.feature_mode)
    return _predict_design(model, xa, xb, xc)


CHECKPOINT_FORMAT = "graphdr-pairscorer"
CHECKPOINT_VERSION = 1


def save_model(model: PairScorer, path) -> None:
    """Write architecture metadata plus all parameter arrays."""
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "feature_mode": model.config.feature_mode,
        "use_context": model.config.use_context,
        "encoder_channels": model.config.encoder_channels,
        "hidden_channels": list(model.config.hidden_channels),
        "dropout": model.config.dropout,
        "drug_dim": model.drug_dim,
        "context_dim": model.context_dim,
    }
    arrays = {f"p{i}": p for i, p in enumerate(model.parameters())}
    with open(path, "wb") as handle:
        np.savez(handle, meta=json.dumps(meta), **arrays)


def load_model(path) -> PairScorer:
    """Rebuild a scorer saved by :func:`save_model`; round-trip is exact."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"][()]))
        if meta.get("format") != CHECKPOINT_FORMAT:
            raise GraphDRError(f"{path}: not a pair scorer checkpoint")
        if meta.get("version") != CHECKPOINT_VERSION:
            raise GraphDRError(f"{path}: unsupported checkpoint version")
        config = PairScorerConfig(
            feature_mode=meta["feature_mode"],
            use_context=meta["use_context"],
            encoder_channels=meta["encoder_channels"],
            hidden_channels=tuple(meta["hidden_channels"]),
            dropout=meta["dropout"],
        )
        model = PairScorer(
            meta["drug_dim"],
            meta["context_dim"],
            config,
            np.random.default_rng(0),
        )
        params = model.parameters()
        saved = [data[f"p{i}"] for i in range(len(params))]
    for p, s in zip(params, saved):
        if p.shape != s.shape:
            raise ShapeMismatch(f"{path}: checkpoint shapes do not match metadata")
        p[...] = s
    return model

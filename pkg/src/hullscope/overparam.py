"""Parameter-elimination regime certification for small feed-forward nets.

A model is certified "over" when some budgeted elimination retrains to
loss <= epsilon, "perfect" when the full model reaches epsilon but every
budgeted elimination fails, and "under" when even the full model never
reaches epsilon within the restart budget (reported honestly as "not
reached within budget"; failed nonconvex training proves nothing).

Training is full-batch gradient descent with momentum, deterministic per
seed. Eliminations are zero-and-freeze masks applied from a fresh
initialization. Two-class problems use a single sigmoid logit (so a
linear model in d dimensions has d + 1 parameters); three or more
classes use softmax outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hull
from .arrays import Dataset


def _activation_fns(name):
    if name == "tanh":
        return np.tanh, lambda z: 1.0 - np.tanh(z) ** 2
    if name == "relu":
        return (lambda z: np.maximum(z, 0.0)), (lambda z: (z > 0.0).astype(float))
    raise ValueError(f"activation must be 'tanh' or 'relu', got {name!r}")


@dataclass
class Mlp:
    """Feed-forward classifier with zero-and-freeze elimination masks.

    weights[l] is (fan_out, fan_in); masks are 0/1 float arrays of the
    same shapes. Masked parameters are exactly zero after construction
    and after every training step.
    """

    layer_sizes: list
    activation: str
    weights: list
    biases: list
    weight_masks: list
    bias_masks: list

    @classmethod
    def init(cls, layer_sizes, activation="tanh", seed=0,
             weight_masks=None, bias_masks=None):
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if any(s < 1 for s in layer_sizes):
            raise ValueError(f"layer sizes must be >= 1, got {layer_sizes}")
        _activation_fns(activation)
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            if activation == "relu":
                std = np.sqrt(2.0 / fan_in)
            else:
                std = np.sqrt(2.0 / (fan_in + fan_out))
            weights.append(std * rng.standard_normal((fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        if weight_masks is None:
            weight_masks = [np.ones_like(w) for w in weights]
        else:
            weight_masks = [np.asarray(m, dtype=float).copy() for m in weight_masks]
        if bias_masks is None:
            bias_masks = [np.ones_like(b) for b in biases]
        else:
            bias_masks = [np.asarray(m, dtype=float).copy() for m in bias_masks]
        model = cls(list(layer_sizes), activation, weights, biases,
                    weight_masks, bias_masks)
        model._clamp_masked()
        return model

    def _clamp_masked(self):
        for w, m in zip(self.weights, self.weight_masks):
            w *= m
        for b, m in zip(self.biases, self.bias_masks):
            b *= m

    @property
    def n_layers(self):
        return len(self.weights)

    @property
    def is_binary(self):
        return self.layer_sizes[-1] == 1

    def active_parameter_count(self):
        return int(sum(m.sum() for m in self.weight_masks)
                   + sum(m.sum() for m in self.bias_masks))

    def copy(self):
        return Mlp(
            list(self.layer_sizes),
            self.activation,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            [m.copy() for m in self.weight_masks],
            [m.copy() for m in self.bias_masks],
        )

    def _forward_full(self, X):
        act, _ = _activation_fns(self.activation)
        pre = []
        post = [X]
        a = X
        for l in range(self.n_layers):
            z = a @ self.weights[l].T + self.biases[l]
            pre.append(z)
            a = act(z) if l < self.n_layers - 1 else z
            post.append(a)
        return pre, post

    def logits(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._forward_full(X)[1][-1]

    def features(self, X):
        """Activations of the last hidden layer (the input if none)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._forward_full(X)[1][-2]

    def predict(self, X):
        z = self.logits(X)
        if self.is_binary:
            return (z[:, 0] > 0.0).astype(np.int64)
        return np.argmax(z, axis=1).astype(np.int64)

    def loss(self, X, y):
        return self._loss_from_logits(self.logits(X), y)

    def _loss_from_logits(self, z, y):
        n = z.shape[0]
        if self.is_binary:
            s = 2.0 * y - 1.0
            return float(np.mean(np.logaddexp(0.0, -s * z[:, 0])))
        zmax = z.max(axis=1, keepdims=True)
        lse = zmax[:, 0] + np.log(np.sum(np.exp(z - zmax), axis=1))
        return float(np.mean(lse - z[np.arange(n), y]))

    def loss_and_grads(self, X, y):
        """Mean cross-entropy and masked gradients for every parameter."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=np.int64)
        n = X.shape[0]
        _, dact = _activation_fns(self.activation)
        pre, post = self._forward_full(X)
        z = post[-1]
        loss = self._loss_from_logits(z, y)

        if self.is_binary:
            sig = 1.0 / (1.0 + np.exp(-z[:, 0]))
            delta = ((sig - y) / n)[:, None]
        else:
            zmax = z.max(axis=1, keepdims=True)
            ez = np.exp(z - zmax)
            soft = ez / ez.sum(axis=1, keepdims=True)
            soft[np.arange(n), y] -= 1.0
            delta = soft / n

        grads_w = [None] * self.n_layers
        grads_b = [None] * self.n_layers
        for l in range(self.n_layers - 1, -1, -1):
            grads_w[l] = (delta.T @ post[l]) * self.weight_masks[l]
            grads_b[l] = delta.sum(axis=0) * self.bias_masks[l]
            if l > 0:
                delta = (delta @ self.weights[l]) * dact(pre[l - 1])
        return loss, grads_w, grads_b

    def to_json_dict(self):
        return {
            "layer_sizes": [int(s) for s in self.layer_sizes],
            "activation": self.activation,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "weight_masks": [m.tolist() for m in self.weight_masks],
            "bias_masks": [m.tolist() for m in self.bias_masks],
        }

    @classmethod
    def from_json_dict(cls, obj):
        return cls(
            [int(s) for s in obj["layer_sizes"]],
            obj["activation"],
            [np.asarray(w, dtype=float) for w in obj["weights"]],
            [np.asarray(b, dtype=float) for b in obj["biases"]],
            [np.asarray(m, dtype=float) for m in obj["weight_masks"]],
            [np.asarray(m, dtype=float) for m in obj["bias_masks"]],
        )


def build_mlp(data, hidden_sizes, activation="tanh", seed=0,
              weight_masks=None, bias_masks=None):
    """Architecture sized to a dataset: one sigmoid logit for two classes,
    softmax outputs otherwise."""
    out = 1 if data.n_classes <= 2 else data.n_classes
    sizes = [data.d] + list(hidden_sizes) + [out]
    return Mlp.init(sizes, activation=activation, seed=seed,
                    weight_masks=weight_masks, bias_masks=bias_masks)


@dataclass(frozen=True)
class TrainResult:
    final_loss: float
    reached_epsilon: bool
    epochs_used: int
    restarts_used: int
    failed_restarts: int

    def to_json_dict(self):
        return {
            "final_loss": self.final_loss,
            "reached_epsilon": self.reached_epsilon,
            "epochs_used": self.epochs_used,
            "restarts_used": self.restarts_used,
            "failed_restarts": self.failed_restarts,
        }


def train(model, data, epsilon=0.05, max_epochs=3000, n_restarts=3, seed=0,
          lr=0.5, momentum=0.9):
    """Full-batch gradient descent with momentum, best restart kept.

    Each restart reinitializes from default_rng([seed, restart]) with the
    model's masks applied throughout, stops early at loss <= epsilon, and
    counts as failed if the loss goes non-finite. The best restart's
    weights are written back into `model`.
    """
    if not isinstance(data, Dataset):
        raise TypeError("data must be a Dataset")
    if data.d != model.layer_sizes[0]:
        raise ValueError(
            f"data dimension {data.d} does not match input size {model.layer_sizes[0]}"
        )
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if max_epochs < 0 or n_restarts < 1:
        raise ValueError("max_epochs must be >= 0 and n_restarts >= 1")

    X, y = data.points, data.labels
    best = None
    best_loss = np.inf
    best_epochs = 0
    failed = 0
    restarts_used = 0

    for restart in range(n_restarts):
        restarts_used = restart + 1
        m = Mlp.init(model.layer_sizes, model.activation,
                     seed=np.random.default_rng([seed, restart]).integers(2**63),
                     weight_masks=model.weight_masks,
                     bias_masks=model.bias_masks)
        vel_w = [np.zeros_like(w) for w in m.weights]
        vel_b = [np.zeros_like(b) for b in m.biases]
        loss = m.loss(X, y)
        epochs = 0
        ok = np.isfinite(loss)
        while ok and loss > epsilon and epochs < max_epochs:
            loss, gw, gb = m.loss_and_grads(X, y)
            if not np.isfinite(loss):
                ok = False
                break
            if loss <= epsilon:
                break
            for l in range(m.n_layers):
                vel_w[l] = momentum * vel_w[l] - lr * gw[l]
                vel_b[l] = momentum * vel_b[l] - lr * gb[l]
                m.weights[l] += vel_w[l]
                m.biases[l] += vel_b[l]
            m._clamp_masked()
            epochs += 1
            loss = m.loss(X, y)
            if not np.isfinite(loss):
                ok = False
        if not ok:
            failed += 1
            continue
        if loss < best_loss:
            best_loss = loss
            best = m
            best_epochs = epochs
        if best_loss <= epsilon:
            break

    if best is None:
        # every restart diverged; keep the masked initial model
        best = Mlp.init(model.layer_sizes, model.activation,
                        seed=np.random.default_rng([seed, 0]).integers(2**63),
                        weight_masks=model.weight_masks,
                        bias_masks=model.bias_masks)
        best_loss = float(best.loss(X, y))
        best_epochs = 0

    model.weights = best.weights
    model.biases = best.biases
    model.weight_masks = best.weight_masks
    model.bias_masks = best.bias_masks
    final_loss = float(best_loss)
    return TrainResult(
        final_loss=final_loss,
        reached_epsilon=final_loss <= epsilon,
        epochs_used=best_epochs,
        restarts_used=restarts_used,
        failed_restarts=failed,
    )


def _check_elimination(model, weight_masks, bias_masks):
    weight_masks = [np.asarray(m, dtype=float) for m in weight_masks]
    bias_masks = [np.asarray(m, dtype=float) for m in bias_masks]
    newly = 0.0
    for old, new in zip(model.weight_masks, weight_masks):
        if new.shape != old.shape:
            raise ValueError("weight mask shape mismatch")
        newly += float(np.sum((old == 1.0) & (new == 0.0)))
    for old, new in zip(model.bias_masks, bias_masks):
        if new.shape != old.shape:
            raise ValueError("bias mask shape mismatch")
        newly += float(np.sum((old == 1.0) & (new == 0.0)))
    if newly < 1:
        raise ValueError("elimination plan removes no currently active parameter")
    for l, (wm, bm) in enumerate(zip(weight_masks, bias_masks)):
        if wm.sum() == 0 and bm.sum() == 0:
            raise ValueError(f"degenerate architecture: layer {l} loses all parameters")
    return weight_masks, bias_masks


def eliminate_and_retrain(model, data, weight_masks, bias_masks, epsilon=0.05,
                          max_epochs=3000, n_restarts=3, seed=0,
                          lr=0.5, momentum=0.9):
    """Retrain from scratch with extra parameters zeroed and frozen.

    The plan must remove at least one currently active parameter and may
    not empty a whole layer. `model` itself is left untouched.
    """
    weight_masks, bias_masks = _check_elimination(model, weight_masks, bias_masks)
    combined_w = [old * new for old, new in zip(model.weight_masks, weight_masks)]
    combined_b = [old * new for old, new in zip(model.bias_masks, bias_masks)]
    trial = Mlp.init(model.layer_sizes, model.activation, seed=0,
                     weight_masks=combined_w, bias_masks=combined_b)
    return train(trial, data, epsilon=epsilon, max_epochs=max_epochs,
                 n_restarts=n_restarts, seed=seed, lr=lr, momentum=momentum)


def _full_masks(model):
    return ([np.ones_like(m) for m in model.weight_masks],
            [np.ones_like(m) for m in model.bias_masks])


def elimination_candidates(model):
    """Greedy elimination order: single weights by ascending magnitude,
    then whole hidden units by ascending combined norm.

    Biases are not auto-candidates (an explicit plan can still remove
    them); unit elimination removes the unit's incoming weights and bias
    and its outgoing weights.
    """
    singles = []
    for l, (w, m) in enumerate(zip(model.weights, model.weight_masks)):
        for i in range(w.shape[0]):
            for j in range(w.shape[1]):
                if m[i, j] == 1.0:
                    singles.append((abs(float(w[i, j])), l, i, j))
    singles.sort()
    out = []
    for mag, l, i, j in singles:
        wm, bm = _full_masks(model)
        wm[l][i, j] = 0.0
        out.append({
            "kind": "weight", "layer": l, "row": i, "col": j,
            "magnitude": mag, "weight_masks": wm, "bias_masks": bm,
        })

    units = []
    for h in range(len(model.layer_sizes) - 2):
        for u in range(model.layer_sizes[h + 1]):
            norm = float(np.sqrt(
                np.sum(model.weights[h][u, :] ** 2)
                + model.biases[h][u] ** 2
                + np.sum(model.weights[h + 1][:, u] ** 2)
            ))
            units.append((norm, h, u))
    units.sort()
    for norm, h, u in units:
        wm, bm = _full_masks(model)
        wm[h][u, :] = 0.0
        bm[h][u] = 0.0
        wm[h + 1][:, u] = 0.0
        out.append({
            "kind": "unit", "layer": h, "unit": u,
            "magnitude": norm, "weight_masks": wm, "bias_masks": bm,
        })
    return out


@dataclass(frozen=True)
class RegimeCertificate:
    """Re-runnable evidence for an over/perfect/under verdict."""

    regime: str
    epsilon: float
    architecture: list
    seeds: list
    base_result: TrainResult
    attempts: list = field(default_factory=list)
    winning_elimination: dict | None = None

    def to_json_dict(self):
        evidence = {
            "final_loss": self.base_result.final_loss,
            "base_result": self.base_result.to_json_dict(),
            "attempts": self.attempts,
        }
        if self.winning_elimination is not None:
            evidence["mask"] = {
                "kind": self.winning_elimination["kind"],
                "layer": self.winning_elimination["layer"],
                "weight_masks": [m.tolist() for m in
                                 self.winning_elimination["weight_masks"]],
                "bias_masks": [m.tolist() for m in
                               self.winning_elimination["bias_masks"]],
            }
        return {
            "regime": self.regime,
            "epsilon": self.epsilon,
            "architecture": [int(s) for s in self.architecture],
            "seeds": [int(s) for s in self.seeds],
            "evidence": evidence,
        }


def classify_regime(hidden_sizes, data, epsilon=0.05, elimination_budget=8,
                    seed=0, activation="tanh", max_epochs=3000, n_restarts=3,
                    lr=0.5, momentum=0.9):
    """Certify a trained architecture as over-, perfectly-, or under-
    parameterized for this dataset and epsilon.

    Under means "not reached within budget" (restarts recorded), never a
    proof. Over is witnessed by the first budgeted elimination that
    retrains to loss <= epsilon; Perfect means all budgeted eliminations
    failed.
    """
    if elimination_budget < 1:
        raise ValueError(f"elimination_budget must be >= 1, got {elimination_budget}")
    model = build_mlp(data, hidden_sizes, activation=activation, seed=seed)
    base = train(model, data, epsilon=epsilon, max_epochs=max_epochs,
                 n_restarts=n_restarts, seed=seed, lr=lr, momentum=momentum)
    seeds = [seed]
    if not base.reached_epsilon:
        return RegimeCertificate(
            regime="under",
            epsilon=epsilon,
            architecture=model.layer_sizes,
            seeds=seeds,
            base_result=base,
            attempts=[{"note": "base training did not reach epsilon within budget"}],
        )

    attempts = []
    for rank, cand in enumerate(elimination_candidates(model)[:elimination_budget]):
        attempt_seed = seed + 1000 + rank
        seeds.append(attempt_seed)
        result = eliminate_and_retrain(
            model, data, cand["weight_masks"], cand["bias_masks"],
            epsilon=epsilon, max_epochs=max_epochs, n_restarts=n_restarts,
            seed=attempt_seed, lr=lr, momentum=momentum,
        )
        record = {
            "kind": cand["kind"],
            "layer": cand["layer"],
            "detail": {k: cand[k] for k in ("row", "col") if k in cand}
                      | ({"unit": cand["unit"]} if "unit" in cand else {}),
            "seed": attempt_seed,
            "final_loss": result.final_loss,
            "reached_epsilon": result.reached_epsilon,
        }
        attempts.append(record)
        if result.reached_epsilon:
            return RegimeCertificate(
                regime="over",
                epsilon=epsilon,
                architecture=model.layer_sizes,
                seeds=seeds,
                base_result=base,
                attempts=attempts,
                winning_elimination=cand,
            )
    return RegimeCertificate(
        regime="perfect",
        epsilon=epsilon,
        architecture=model.layer_sizes,
        seeds=seeds,
        base_result=base,
        attempts=attempts,
    )


@dataclass(frozen=True)
class GeneralizationSplit:
    n: int
    accuracy: float | None
    mean_distance: float | None

    def to_json_dict(self):
        return {"n": self.n, "accuracy": self.accuracy,
                "mean_distance": self.mean_distance}


@dataclass(frozen=True)
class GeneralizationReport:
    """Test accuracy split by hull membership of each test point."""

    interpolation: GeneralizationSplit
    extrapolation: GeneralizationSplit
    unresolved: GeneralizationSplit
    overall_accuracy: float

    def to_json_dict(self):
        return {
            "interpolation": self.interpolation.to_json_dict(),
            "extrapolation": self.extrapolation.to_json_dict(),
            "unresolved": self.unresolved.to_json_dict(),
            "overall_accuracy": self.overall_accuracy,
        }


def decompose_generalization(clf, train_set, test_set, dist_tol=1e-6):
    """Split test points by membership in the training hull and report
    accuracy and mean hull distance for each group."""
    if train_set.d != test_set.d:
        raise ValueError(
            f"dimension mismatch: train is {train_set.d}-D, test {test_set.d}-D"
        )
    labels = np.asarray(clf(test_set.points), dtype=np.int64)
    correct = labels == test_set.labels
    buckets = {"in": [], "out": [], "unresolved": []}
    dists = {"in": [], "out": [], "unresolved": []}
    for i, x in enumerate(test_set.points):
        status = hull.membership(x, train_set.points, dist_tol=dist_tol)
        if isinstance(status, hull.InHull):
            key = "in"
        elif isinstance(status, hull.OutOfHull):
            key = "out"
        else:
            key = "unresolved"
        buckets[key].append(bool(correct[i]))
        dists[key].append(status.distance)

    def split(key):
        hits = buckets[key]
        if not hits:
            return GeneralizationSplit(0, None, None)
        return GeneralizationSplit(
            n=len(hits),
            accuracy=float(np.mean(hits)),
            mean_distance=float(np.mean(dists[key])),
        )

    return GeneralizationReport(
        interpolation=split("in"),
        extrapolation=split("out"),
        unresolved=split("unresolved"),
        overall_accuracy=float(np.mean(correct)),
    )

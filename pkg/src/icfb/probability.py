"""Finite-alphabet joint pmfs and information measures.

Everything downstream (rate-bound evaluation, region constants, typicality
references) reduces to entropies of marginals of a dense joint probability
tensor, so this module is deliberately small and strict: dense numpy storage,
hard validation at construction, log base 2 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

#: Largest number of cells a joint tensor may hold.  Theorem-1 joints have up
#: to 11 variables; this cap turns an accidental alphabet blowup into a clean
#: error instead of an allocation storm.
DEFAULT_CELL_CAP = 2**22

_SUM_TOL = 1e-12
_NEG_MI_ERROR = 1e-8


class PmfError(ValueError):
    """Invalid probability data (negative mass, bad normalization, ...)."""


class LabelError(PmfError):
    """Unknown, duplicate, or conflicting variable label."""


class CellCapError(PmfError):
    """Joint tensor would exceed the configured cell cap."""


def _as_labelset(labels: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


@dataclass(frozen=True)
class JointPmf:
    """Dense joint pmf over an ordered tuple of finite-alphabet variables."""

    variables: tuple[tuple[str, int], ...]
    weights: np.ndarray

    def __post_init__(self) -> None:
        variables = tuple((str(lab), int(size)) for lab, size in self.variables)
        object.__setattr__(self, "variables", variables)
        labels = [lab for lab, _ in variables]
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate variable labels: {labels}")
        if any(size < 1 for _, size in variables):
            raise PmfError("alphabet sizes must be >= 1")
        shape = tuple(size for _, size in variables)
        cells = math.prod(shape) if shape else 1
        if cells > DEFAULT_CELL_CAP:
            raise CellCapError(f"joint has {cells} cells > cap {DEFAULT_CELL_CAP}")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != shape:
            raise PmfError(f"weights shape {w.shape} != alphabet shape {shape}")
        if np.any(w < 0):
            raise PmfError("negative probability mass")
        total = float(w.sum())
        if abs(total - 1.0) > 1e-9:
            raise PmfError(f"total mass {total} not 1")
        if abs(total - 1.0) > _SUM_TOL:
            w = w / total
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    # -- introspection -------------------------------------------------------

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.variables)

    def axis(self, label: str) -> int:
        for i, (lab, _) in enumerate(self.variables):
            if lab == label:
                return i
        raise LabelError(f"unknown label {label!r}")

    def alphabet_size(self, label: str) -> int:
        return self.variables[self.axis(label)][1]

    # -- constructors --------------------------------------------------------

    @classmethod
    def single(cls, label: str, probs: Sequence[float]) -> "JointPmf":
        p = np.asarray(probs, dtype=float)
        return cls(variables=((label, p.shape[0]),), weights=p)

    @classmethod
    def uniform(cls, label: str, size: int) -> "JointPmf":
        return cls.single(label, np.full(size, 1.0 / size))


@dataclass(frozen=True)
class Kernel:
    """Conditional pmf of one or more output variables given input labels.

    ``weights`` carries one axis per input (in ``inputs`` order, alphabet
    sizes implied by the shape) followed by one axis per output.  Every row
    (fixed input combination) must be a pmf over the outputs.
    """

    inputs: tuple[str, ...]
    outputs: tuple[tuple[str, int], ...]
    weights: np.ndarray

    def __post_init__(self) -> None:
        inputs = tuple(str(lab) for lab in self.inputs)
        outputs = tuple((str(lab), int(size)) for lab, size in self.outputs)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        if not outputs:
            raise LabelError("kernel needs at least one output variable")
        all_labels = list(inputs) + [lab for lab, _ in outputs]
        if len(set(all_labels)) != len(all_labels):
            raise LabelError(f"duplicate labels in kernel: {all_labels}")
        w = np.asarray(self.weights, dtype=float)
        out_shape = tuple(size for _, size in outputs)
        if w.ndim != len(inputs) + len(outputs) or w.shape[len(inputs):] != out_shape:
            raise PmfError(
                f"kernel weights shape {w.shape} incompatible with "
                f"{len(inputs)} inputs and output shape {out_shape}"
            )
        if np.any(w < 0):
            raise PmfError("negative kernel weight")
        out_axes = tuple(range(len(inputs), w.ndim))
        row_sums = w.sum(axis=out_axes)
        if np.any(np.abs(row_sums - 1.0) > 1e-9):
            raise PmfError("kernel rows must sum to 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.weights.shape[: len(self.inputs)]

    @classmethod
    def deterministic(
        cls,
        inputs: Sequence[str],
        input_sizes: Sequence[int],
        outputs: Sequence[tuple[str, int]],
        fn: Callable[..., tuple[int, ...] | int],
    ) -> "Kernel":
        """Kernel of a deterministic map; ``fn`` takes input indices and
        returns the output index (or index tuple for several outputs)."""
        outputs = tuple(outputs)
        out_shape = tuple(size for _, size in outputs)
        w = np.zeros(tuple(input_sizes) + out_shape)
        for idx in np.ndindex(*input_sizes):
            out = fn(*idx)
            if not isinstance(out, tuple):
                out = (out,)
            w[idx + out] = 1.0
        return cls(inputs=tuple(inputs), outputs=outputs, weights=w)


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def extend(base: JointPmf, k: Kernel) -> JointPmf:
    """Chain a conditional factor onto a joint: P(base) * P(out | inputs)."""
    base_labels = base.labels
    for lab in k.inputs:
        if lab not in base_labels:
            raise LabelError(f"kernel input {lab!r} not in joint {base_labels}")
    for lab, _ in k.outputs:
        if lab in base_labels:
            raise LabelError(f"kernel output {lab!r} already present")
    for lab, size in zip(k.inputs, k.input_shape):
        if base.alphabet_size(lab) != size:
            raise PmfError(
                f"kernel input {lab!r} expects alphabet {size}, "
                f"joint has {base.alphabet_size(lab)}"
            )
    n_total = len(base_labels) + len(k.outputs)
    if n_total > len(_LETTERS):
        raise PmfError("too many variables for einsum contraction")
    letter = {lab: _LETTERS[i] for i, lab in enumerate(base_labels)}
    out_letters = ""
    for j, (lab, _) in enumerate(k.outputs):
        letter[lab] = _LETTERS[len(base_labels) + j]
        out_letters += letter[lab]
    sub_base = "".join(letter[lab] for lab in base_labels)
    sub_kernel = "".join(letter[lab] for lab in k.inputs) + out_letters
    sub_out = sub_base + out_letters
    cells = math.prod(s for _, s in base.variables) * math.prod(s for _, s in k.outputs)
    if cells > DEFAULT_CELL_CAP:
        raise CellCapError(f"extended joint has {cells} cells > cap {DEFAULT_CELL_CAP}")
    w = np.einsum(f"{sub_base},{sub_kernel}->{sub_out}", base.weights, k.weights)
    return JointPmf(variables=base.variables + k.outputs, weights=w)


def marginalize(joint: JointPmf, keep: Iterable[str] | str) -> JointPmf:
    """Sum out every variable not in ``keep`` (order of ``joint`` preserved)."""
    keep = set(_as_labelset(keep))
    if not keep:
        raise LabelError("keep set must be nonempty")
    unknown = keep - set(joint.labels)
    if unknown:
        raise LabelError(f"unknown labels {sorted(unknown)}")
    drop_axes = tuple(i for i, (lab, _) in enumerate(joint.variables) if lab not in keep)
    variables = tuple(v for v in joint.variables if v[0] in keep)
    w = joint.weights.sum(axis=drop_axes) if drop_axes else joint.weights
    return JointPmf(variables=variables, weights=w)


def _plain_entropy(joint: JointPmf, labels: tuple[str, ...]) -> float:
    w = marginalize(joint, labels).weights.ravel()
    p = w[w > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(joint: JointPmf, target: Iterable[str] | str, given: Iterable[str] | str = ()) -> float:
    """Conditional entropy H(target | given) in bits, 0 log 0 = 0."""
    target = _as_labelset(target)
    given = _as_labelset(given)
    if not target:
        raise LabelError("target must be nonempty")
    if set(target) & set(given):
        raise LabelError("target and given overlap")
    h = _plain_entropy(joint, target + given)
    if given:
        h -= _plain_entropy(joint, given)
    return max(h, 0.0)


def mutual_information(
    joint: JointPmf,
    a: Iterable[str] | str,
    b: Iterable[str] | str,
    given: Iterable[str] | str = (),
) -> float:
    """Conditional mutual information I(a; b | given) in bits."""
    a = _as_labelset(a)
    b = _as_labelset(b)
    given = _as_labelset(given)
    if not a or not b:
        raise LabelError("a and b must be nonempty")
    if set(a) & set(b) or set(a) & set(given) or set(b) & set(given):
        raise LabelError("a, b, given must be pairwise disjoint")
    mi = entropy(joint, a, given) - entropy(joint, a, tuple(b) + tuple(given))
    if mi < -_NEG_MI_ERROR:
        raise PmfError(f"mutual information {mi} below -{_NEG_MI_ERROR}; broken pmf")
    return max(mi, 0.0)

"""Time-domain simulation of the shift-matrix IC with intermittent feedback.

Covers four layers of validation:

* per-step channel evaluation (``transmit``) and the encoder-side
  interference reconstruction that the injectivity argument guarantees
  (``reconstruct_tilde``);
* i.i.d. state sampling against a joint state law;
* an empirical test of the compression covering step: the probability that a
  rate-Rhat random codebook contains a codeword jointly typical with the
  source pair.  Small codebooks are materialized; large ones use the exact
  per-trial success probability over the codebook ensemble (the codewords are
  i.i.d., so success is Bernoulli(1 - (1 - p_typ)^M) given the source draw);
* a toy-scale end-to-end run of the block-Markov scheme with simultaneous
  nonunique decoding.

Typicality throughout is robust (strong) typicality with per-letter tolerance
eps * p(a) + eps / |alphabet|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import FeedbackStateSpec, LdicParams, bits_of, index_of, ldic_build, shift_apply
from .probability import JointPmf, marginalize

#: Erasure marker for feedback values (distinct from any bit-vector).
ERASED = "*"


class SimulatorError(ValueError):
    """Invalid simulation parameters or resource-cap breach."""


class CapExceededError(SimulatorError):
    """Codebook or decoder search size above the configured cap."""


# ---------------------------------------------------------------------------
# States and per-symbol channel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateTrace:
    """Per-time-step feedback states, 1 = delivered, 0 = erased."""

    s1: np.ndarray
    s2: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        for name in ("s1", "s2"):
            arr = np.asarray(getattr(self, name), dtype=int)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.s1.shape != self.s2.shape or self.s1.ndim != 1:
            raise SimulatorError("state arrays must be 1-D of equal length")

    def __len__(self) -> int:
        return self.s1.shape[0]


def sample_states(n: int, fb: FeedbackStateSpec, seed: int) -> StateTrace:
    if n < 1:
        raise SimulatorError("trace length must be >= 1")
    rng = np.random.default_rng(seed)
    flat = rng.choice(4, size=n, p=fb.joint.ravel())
    return StateTrace(s1=flat // 2, s2=flat % 2, seed=seed)


@dataclass(frozen=True)
class TransmitResult:
    y3: np.ndarray
    y4: np.ndarray
    fb1: np.ndarray | str  # y3 or ERASED
    fb2: np.ndarray | str  # y4 or ERASED


def transmit(params: LdicParams, x1, x2, state: tuple[int, int]) -> TransmitResult:
    """One channel use: outputs per the shift-matrix law, feedback per state."""
    q = params.q
    x1 = np.asarray(x1, dtype=int)
    x2 = np.asarray(x2, dtype=int)
    if x1.shape != (q,) or x2.shape != (q,):
        raise SimulatorError(f"input vectors must have length {q}")
    y3 = shift_apply(q, params.n11, x1) ^ shift_apply(q, params.n12, x2)
    y4 = shift_apply(q, params.n22, x2) ^ shift_apply(q, params.n21, x1)
    s1, s2 = state
    return TransmitResult(
        y3=y3,
        y4=y4,
        fb1=y3 if s1 else ERASED,
        fb2=y4 if s2 else ERASED,
    )


def reconstruct_tilde(params: LdicParams, own_x, fb, which_encoder: int):
    """Recover the state-thinned interference from own input and feedback.

    Encoder 1 observes y3 (when delivered) and strips its own contribution;
    injectivity of the XOR makes the result exactly S1*T2.  Mirrored for
    encoder 2.  Erased feedback stays erased.
    """
    if isinstance(fb, str) and fb == ERASED:
        return ERASED
    q = params.q
    own_x = np.asarray(own_x, dtype=int)
    fb = np.asarray(fb, dtype=int)
    if own_x.shape != (q,) or fb.shape != (q,):
        raise SimulatorError(f"vectors must have length {q}")
    if which_encoder == 1:
        return fb ^ shift_apply(q, params.n11, own_x)
    if which_encoder == 2:
        return fb ^ shift_apply(q, params.n22, own_x)
    raise SimulatorError("which_encoder must be 1 or 2")


# ---------------------------------------------------------------------------
# Robust typicality
# ---------------------------------------------------------------------------


def typicality_box(pmf: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell frequency tolerance band for robust typicality."""
    slack = eps * pmf + eps / pmf.size
    return np.maximum(pmf - slack, 0.0), pmf + slack


def is_typical(counts: np.ndarray, pmf: np.ndarray, n: int, eps: float) -> bool:
    lo, hi = typicality_box(pmf, eps)
    freq = counts / n
    return bool(np.all(freq >= lo - 1e-12) and np.all(freq <= hi + 1e-12))


def sequence_counts(shape: Sequence[int], *seqs: np.ndarray) -> np.ndarray:
    """Joint empirical counts of parallel symbol sequences."""
    flat = np.ravel_multi_index(tuple(np.asarray(s, dtype=int) for s in seqs), tuple(shape))
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(tuple(shape))


# ---------------------------------------------------------------------------
# Covering-step Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoveringFamily:
    """Source/test-channel triple for the compression covering experiment."""

    p_u: np.ndarray  # (|U|,)
    p_y_given_u: np.ndarray  # (|U|, |Y|)
    p_v_given_uy: np.ndarray  # (|U|, |Y|, |V|)

    def __post_init__(self) -> None:
        pu = np.asarray(self.p_u, dtype=float)
        py = np.asarray(self.p_y_given_u, dtype=float)
        pv = np.asarray(self.p_v_given_uy, dtype=float)
        if pu.ndim != 1 or py.ndim != 2 or pv.ndim != 3:
            raise SimulatorError("bad factor shapes")
        if py.shape[0] != pu.shape[0] or pv.shape[:2] != py.shape:
            raise SimulatorError("inconsistent alphabets across factors")
        for arr, axis in ((pu, 0), (py, 1), (pv, 2)):
            if np.any(arr < 0) or np.any(np.abs(arr.sum(axis=axis) - 1.0) > 1e-9):
                raise SimulatorError("factors must be (rows of) pmfs")
        for name, arr in (("p_u", pu), ("p_y_given_u", py), ("p_v_given_uy", pv)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def joint(self) -> np.ndarray:
        """P(u, y, v)."""
        return self.p_u[:, None, None] * self.p_y_given_u[:, :, None] * self.p_v_given_uy

    @property
    def codeword_law(self) -> np.ndarray:
        """P(v | u): the law codewords are drawn from, Y averaged out."""
        return np.einsum("uy,uyv->uv", self.p_y_given_u, self.p_v_given_uy)

    def compression_cost(self) -> float:
        """I(V; Y | U) in bits, evaluated through the probability module."""
        nu, ny, nv = self.p_v_given_uy.shape
        joint = JointPmf(
            variables=(("U", nu), ("Y", ny), ("V", nv)), weights=self.joint
        )
        from .probability import mutual_information

        return mutual_information(joint, "V", "Y", "U")


def _log_multinomial_box(n: int, probs: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    """log Pr(N_c in [lo_c, hi_c] for all c), N ~ Multinomial(n, probs)."""
    lo = np.maximum(lo.astype(int), 0)
    hi = np.minimum(hi.astype(int), n)
    if np.any(lo > hi):
        return -math.inf
    cur = np.full(n + 1, -math.inf)
    cur[0] = 0.0
    for c in range(probs.size):
        lp = math.log(probs[c]) if probs[c] > 0 else -math.inf
        nxt = np.full(n + 1, -math.inf)
        for j in range(int(lo[c]), int(hi[c]) + 1):
            if j > 0 and not math.isfinite(lp):
                break
            term = j * lp - math.lgamma(j + 1) if j else 0.0
            if j <= n:
                np.logaddexp(nxt[j:], cur[: n + 1 - j] + term, out=nxt[j:])
        cur = nxt
    if not math.isfinite(cur[n]):
        return -math.inf
    return math.lgamma(n + 1) + float(cur[n])


def _ensemble_success_prob(
    fam: CoveringFamily, u_seq: np.ndarray, y_seq: np.ndarray, n: int, eps: float, m_log2: float
) -> float:
    """Exact Pr(some of 2^m_log2 i.i.d. codewords is typical | source draw)."""
    joint = fam.joint
    nu, ny, nv = joint.shape
    lo_f, hi_f = typicality_box(joint, eps)
    pair_counts = sequence_counts((nu, ny), u_seq, y_seq)
    law = fam.codeword_law
    log_p = 0.0
    for a in range(nu):
        for b in range(ny):
            n_ab = int(pair_counts[a, b])
            lo = np.ceil(lo_f[a, b] * n - 1e-9)
            hi = np.floor(hi_f[a, b] * n + 1e-9)
            if n_ab == 0:
                if np.any(lo > 0):
                    return 0.0
                continue
            contrib = _log_multinomial_box(n_ab, law[a], lo, hi)
            if not math.isfinite(contrib):
                return 0.0
            log_p += contrib
    # success = 1 - (1 - p)^M, computed in log space
    if log_p >= 0.0:
        return 1.0
    p = math.exp(log_p)
    if p >= 1.0:
        return 1.0
    log1m = math.log1p(-p) if p > 1e-15 else -p
    exponent = (2.0**m_log2) * log1m
    return -math.expm1(exponent)


def covering_success_rate(
    fam: CoveringFamily,
    n: int,
    rhat: float,
    eps: float,
    trials: int,
    seed: int,
    direct_cap: int = 4096,
) -> float:
    """Empirical probability that the compression codebook covers the source.

    Codebook size is 2^ceil(n * rhat).  Up to ``direct_cap`` codewords the
    codebook is materialized and searched; above that the per-trial success
    probability over the codeword ensemble is computed exactly and a Bernoulli
    outcome is drawn, which is distributionally identical.
    """
    if trials < 1:
        raise SimulatorError("trials must be >= 1")
    if n < 1 or rhat < 0 or eps <= 0:
        raise SimulatorError("need n >= 1, rhat >= 0, eps > 0")
    m_log2 = math.ceil(n * rhat)
    rng = np.random.default_rng(seed)
    joint = fam.joint
    nu, ny, nv = joint.shape
    law = fam.codeword_law
    successes = 0
    for _ in range(trials):
        u_seq = rng.choice(nu, size=n, p=fam.p_u)
        y_seq = np.array([rng.choice(ny, p=fam.p_y_given_u[a]) for a in u_seq])
        if m_log2 <= math.log2(direct_cap):
            m = 1 << m_log2
            ok = False
            for _cw in range(m):
                v_seq = np.array([rng.choice(nv, p=law[a]) for a in u_seq])
                counts = sequence_counts((nu, ny, nv), u_seq, y_seq, v_seq)
                if is_typical(counts, joint, n, eps):
                    ok = True
                    break
            successes += ok
        else:
            sigma = _ensemble_success_prob(fam, u_seq, y_seq, n, eps, float(m_log2))
            successes += rng.random() < sigma
    return successes / trials


# ---------------------------------------------------------------------------
# Toy end-to-end block-Markov scheme
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SchemeConfig:
    """Toy-scale parameters of the block-Markov run.

    Rates are bits per channel use; message codebooks hold
    2^ceil(n * blocks * rate) words (messages span all blocks), compression
    codebooks 2^ceil(n * rhat) words per block.
    """

    n: int
    blocks: int
    r10: float = 0.0
    r11: float = 0.0
    r20: float = 0.0
    r22: float = 0.0
    rhat1: float = 0.0
    rhat2: float = 0.0
    eps: float = 0.6
    seed: int = 0
    trials: int = 20
    search_cap: int = 1 << 14

    def __post_init__(self) -> None:
        if self.n < 1 or self.blocks < 1 or self.trials < 1:
            raise SimulatorError("n, blocks, trials must be >= 1")
        for name in ("r10", "r11", "r20", "r22", "rhat1", "rhat2"):
            if getattr(self, name) < 0:
                raise SimulatorError(f"rate {name} must be >= 0")

    def sizes(self) -> dict[str, int]:
        nb = self.n * self.blocks
        return {
            "m10": 1 << math.ceil(nb * self.r10),
            "m11": 1 << math.ceil(nb * self.r11),
            "m20": 1 << math.ceil(nb * self.r20),
            "m22": 1 << math.ceil(nb * self.r22),
            "mhat1": 1 << math.ceil(self.n * self.rhat1),
            "mhat2": 1 << math.ceil(self.n * self.rhat2),
        }


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    true_messages: tuple[int, int, int, int]  # (w10, w11, w20, w22)
    decoded_1: tuple[int, int] | None
    decoded_2: tuple[int, int] | None
    ok_1: bool
    ok_2: bool


@dataclass(frozen=True)
class SchemeResult:
    error_rate_1: float
    error_rate_2: float
    diagnostics: dict
    trials: tuple[TrialRecord, ...] = field(repr=False, default=())


def _scheme_reference(params: LdicParams, fb: FeedbackStateSpec, use_v: tuple[bool, bool]):
    """Single-letter reference pmfs for typicality checks.

    Inputs uniform, no public layer (U constant); V_k copies the feedback
    observation (the reconstructed thinned interference) when the compression
    rate is positive, and is degenerate otherwise.
    """
    from .probability import Kernel, extend

    det = ldic_build(params)
    size = det.nx1
    shape = (size, size, 2, 2)
    w = np.zeros(shape)
    for x1 in range(size):
        for x2 in range(size):
            for s1 in (0, 1):
                for s2 in (0, 1):
                    w[x1, x2, s1, s2] = fb.joint[s1, s2] / (size * size)
    base = JointPmf(
        variables=(("X1", size), ("X2", size), ("S1", 2), ("S2", 2)), weights=w
    )
    k_obs = Kernel.deterministic(
        inputs=("X1", "X2", "S1", "S2"),
        input_sizes=(size, size, 2, 2),
        outputs=(("Y3", size), ("Y4", size), ("O1", size + 1), ("O2", size + 1)),
        fn=lambda x1, x2, s1, s2: (
            det.f3[x1, det.t2[x2]],
            det.f4[x2, det.t1[x1]],
            det.t2[x2] if s1 else size,  # encoder 1 sees ~T2
            det.t1[x1] if s2 else size,  # encoder 2 sees ~T1
        ),
    )
    joint = extend(base, k_obs)
    # V_k: copy of the observation, or degenerate
    nv1 = size + 1 if use_v[0] else 1
    nv2 = size + 1 if use_v[1] else 1
    k_v1 = Kernel.deterministic(
        inputs=("O1",), input_sizes=(size + 1,), outputs=(("V1", nv1),),
        fn=(lambda o: o) if use_v[0] else (lambda o: 0),
    )
    k_v2 = Kernel.deterministic(
        inputs=("O2",), input_sizes=(size + 1,), outputs=(("V2", nv2),),
        fn=(lambda o: o) if use_v[1] else (lambda o: 0),
    )
    joint = extend(extend(joint, k_v1), k_v2)
    return det, joint, (nv1, nv2)


def simulate_scheme(params: LdicParams, fb: FeedbackStateSpec, cfg: SchemeConfig) -> SchemeResult:
    """Run the block-Markov scheme end to end at toy scale.

    Decoder k performs simultaneous nonunique decoding over all blocks: the
    other user's public message and all compression indices are searched but
    not required to be unique; index consistency (the same compression index
    wherever the same symbol appears) is enforced inside the search.  Both
    no-candidate and ambiguous-message outcomes count as errors.
    """
    sizes = cfg.sizes()
    m10, m11, m20, m22 = sizes["m10"], sizes["m11"], sizes["m20"], sizes["m22"]
    mhat1, mhat2 = sizes["mhat1"], sizes["mhat2"]
    b = cfg.blocks
    search_1 = m10 * m11 * m20 * (mhat1**b) * (mhat2**b)
    search_2 = m20 * m22 * m10 * (mhat1**b) * (mhat2**b)
    if max(search_1, search_2) > cfg.search_cap:
        raise CapExceededError(
            f"decoder search size {max(search_1, search_2)} exceeds cap {cfg.search_cap}"
        )
    det, ref_joint, (nv1, nv2) = _scheme_reference(params, fb, (mhat1 > 1, mhat2 > 1))
    size = det.nx1
    q = params.q
    n = cfg.n

    def ref_pmf(labels: tuple[str, ...]) -> np.ndarray:
        m = marginalize(ref_joint, labels)
        perm = tuple(m.labels.index(lab) for lab in labels)
        return np.transpose(m.weights, perm)

    p_enc1 = ref_pmf(("V1", "O1"))
    p_enc2 = ref_pmf(("V2", "O2"))
    p_dec1 = ref_pmf(("V1", "X1", "V2", "Y3"))
    p_dec2 = ref_pmf(("V2", "X2", "V1", "Y4"))

    rng = np.random.default_rng(cfg.seed)
    records: list[TrialRecord] = []
    err1 = err2 = 0
    enc_failures = 0

    for trial in range(cfg.trials):
        # per-block codebooks (messages span all blocks; fresh codebooks per block)
        x1_cb = rng.integers(0, size, size=(b, m10, mhat1, m11, n))
        x2_cb = rng.integers(0, size, size=(b, m20, mhat2, m22, n))
        law_v1 = ref_pmf(("V1",))
        law_v2 = ref_pmf(("V2",))
        v1_cb = np.array(
            [rng.choice(nv1, size=(m10, mhat1, mhat1, n), p=law_v1) for _ in range(b)]
        )
        v2_cb = np.array(
            [rng.choice(nv2, size=(m20, mhat2, mhat2, n), p=law_v2) for _ in range(b)]
        )
        w10 = int(rng.integers(m10))
        w11 = int(rng.integers(m11))
        w20 = int(rng.integers(m20))
        w22 = int(rng.integers(m22))
        states = sample_states(n * b, fb, seed=int(rng.integers(2**31)))

        t1_idx = [0] * (b + 1)  # t1_idx[i] = index chosen at block i (1-based); [0] is default
        t2_idx = [0] * (b + 1)
        obs1_blocks: list[np.ndarray] = []  # encoder 1 observation (~T2 symbol per step)
        obs2_blocks: list[np.ndarray] = []
        y3_blocks: list[np.ndarray] = []
        y4_blocks: list[np.ndarray] = []

        for blk in range(1, b + 1):
            # compression of the previous block's observation
            if blk >= 2:
                for enc, (obs_blocks, cb, t_idx, mhat, p_pair, nv) in enumerate(
                    (
                        (obs1_blocks, v1_cb, t1_idx, mhat1, p_enc1, nv1),
                        (obs2_blocks, v2_cb, t2_idx, mhat2, p_enc2, nv2),
                    )
                ):
                    w_pub = w10 if enc == 0 else w20
                    prev_obs = obs_blocks[blk - 2]
                    chosen = 0
                    if mhat > 1:
                        for t in range(mhat):
                            cw = cb[blk - 2, w_pub, t_idx[blk - 2], t]
                            counts = sequence_counts((nv, size + 1), cw, prev_obs)
                            if is_typical(counts, p_pair, n, cfg.eps):
                                chosen = t
                                break
                        else:
                            enc_failures += 1
                    t_idx[blk - 1] = chosen
            x1_seq = x1_cb[blk - 1, w10, t1_idx[blk - 1], w11]
            x2_seq = x2_cb[blk - 1, w20, t2_idx[blk - 1], w22]
            y3_seq = np.empty(n, dtype=int)
            y4_seq = np.empty(n, dtype=int)
            o1_seq = np.empty(n, dtype=int)
            o2_seq = np.empty(n, dtype=int)
            for i in range(n):
                step = (blk - 1) * n + i
                res = transmit(
                    params,
                    bits_of(int(x1_seq[i]), q),
                    bits_of(int(x2_seq[i]), q),
                    (int(states.s1[step]), int(states.s2[step])),
                )
                y3_seq[i] = index_of(res.y3)
                y4_seq[i] = index_of(res.y4)
                tilde2 = reconstruct_tilde(params, bits_of(int(x1_seq[i]), q), res.fb1, 1)
                tilde1 = reconstruct_tilde(params, bits_of(int(x2_seq[i]), q), res.fb2, 2)
                o1_seq[i] = size if isinstance(tilde2, str) else index_of(tilde2)
                o2_seq[i] = size if isinstance(tilde1, str) else index_of(tilde1)
            y3_blocks.append(y3_seq)
            y4_blocks.append(y4_seq)
            obs1_blocks.append(o1_seq)
            obs2_blocks.append(o2_seq)

        decoded_1 = _decode(
            y3_blocks, x1_cb, v1_cb, v2_cb, (m10, m11, m20, mhat1, mhat2),
            p_dec1, (nv1, size, nv2, size), n, b, cfg.eps,
        )
        decoded_2 = _decode(
            y4_blocks, x2_cb, v2_cb, v1_cb, (m20, m22, m10, mhat2, mhat1),
            p_dec2, (nv2, size, nv1, size), n, b, cfg.eps,
        )
        ok_1 = decoded_1 == (w10, w11)
        ok_2 = decoded_2 == (w20, w22)
        err1 += not ok_1
        err2 += not ok_2
        records.append(
            TrialRecord(
                trial=trial,
                true_messages=(w10, w11, w20, w22),
                decoded_1=decoded_1,
                decoded_2=decoded_2,
                ok_1=ok_1,
                ok_2=ok_2,
            )
        )

    diagnostics = {
        "sizes": sizes,
        "search_size_1": search_1,
        "search_size_2": search_2,
        "encoder_covering_failures": enc_failures,
    }
    return SchemeResult(
        error_rate_1=err1 / cfg.trials,
        error_rate_2=err2 / cfg.trials,
        diagnostics=diagnostics,
        trials=tuple(records),
    )


def _decode(
    y_blocks: list[np.ndarray],
    own_x_cb: np.ndarray,
    own_v_cb: np.ndarray,
    oth_v_cb: np.ndarray,
    sizes: tuple[int, int, int, int, int],
    ref: np.ndarray,
    shape: tuple[int, int, int, int],
    n: int,
    b: int,
    eps: float,
) -> tuple[int, int] | None:
    """Simultaneous nonunique joint-typicality decoding for one receiver.

    Returns the decoded (public, private) message pair, or None when no
    candidate is typical or several distinct message pairs are.
    """
    m_pub, m_priv, m_oth, mhat_own, mhat_oth = sizes
    nv_own, nx, nv_oth, _ = shape
    found: set[tuple[int, int]] = set()
    import itertools as _it

    for w_pub in range(m_pub):
        for w_priv in range(m_priv):
            hit = False
            for w_oth in range(m_oth):
                for t_own in _it.product(range(mhat_own), repeat=b):
                    for t_oth in _it.product(range(mhat_oth), repeat=b):
                        ok = True
                        t_own_full = (0,) + t_own  # default index before block 1
                        t_oth_full = (0,) + t_oth
                        for blk in range(b):
                            v_own = own_v_cb[blk, w_pub, t_own_full[blk], t_own_full[blk + 1]]
                            x_own = own_x_cb[blk, w_pub, t_own_full[blk], w_priv]
                            v_oth = oth_v_cb[blk, w_oth, t_oth_full[blk], t_oth_full[blk + 1]]
                            counts = sequence_counts(
                                (nv_own, nx, nv_oth, shape[3]),
                                v_own, x_own, v_oth, y_blocks[blk],
                            )
                            if not is_typical(counts, ref, n, eps):
                                ok = False
                                break
                        if ok:
                            hit = True
                            break
                    if hit:
                        break
                if hit:
                    break
            if hit:
                found.add((w_pub, w_priv))
                if len(found) > 1:
                    return None
    if len(found) == 1:
        return next(iter(found))
    return None

import math

import numpy as np
import pytest

from icfb.probability import (
    CellCapError,
    JointPmf,
    Kernel,
    LabelError,
    PmfError,
    entropy,
    extend,
    marginalize,
    mutual_information,
)


def uniform_bit(label: str = "X") -> JointPmf:
    return JointPmf(variables=((label, 2),), weights=np.array([0.5, 0.5]))


def identity_kernel(inp: str, out: str) -> Kernel:
    return Kernel(inputs=(inp,), outputs=((out, 2),), weights=np.eye(2))


def bsc_kernel(inp: str, out: str, flip: float) -> Kernel:
    return Kernel(
        inputs=(inp,),
        outputs=((out, 2),),
        weights=np.array([[1 - flip, flip], [flip, 1 - flip]]),
    )


def random_joint(rng: np.random.Generator, sizes: dict[str, int]) -> JointPmf:
    shape = tuple(sizes.values())
    w = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    return JointPmf(variables=tuple(sizes.items()), weights=w)


class TestJointPmf:
    def test_rejects_non_normalized(self):
        with pytest.raises(PmfError):
            JointPmf(variables=(("X", 2),), weights=np.array([0.5, 0.6]))

    def test_rejects_negative_weights(self):
        with pytest.raises(PmfError):
            JointPmf(variables=(("X", 2),), weights=np.array([1.1, -0.1]))

    def test_rejects_duplicate_labels(self):
        with pytest.raises(LabelError):
            JointPmf(variables=(("X", 2), ("X", 2)), weights=np.full((2, 2), 0.25))

    def test_cell_cap(self):
        with pytest.raises(CellCapError):
            JointPmf(variables=(("X", 1 << 12), ("Y", 1 << 12)), weights=np.zeros(1))

    def test_weights_read_only(self):
        pmf = uniform_bit()
        with pytest.raises(ValueError):
            pmf.weights[0] = 0.3


class TestExtend:
    def test_identity_kernel(self):
        joint = extend(uniform_bit(), identity_kernel("X", "Y"))
        assert np.allclose(joint.weights, np.array([[0.5, 0.0], [0.0, 0.5]]))

    def test_constant_output(self):
        k = Kernel(inputs=("X",), outputs=(("Y", 2),), weights=np.array([[1, 0], [1, 0]]))
        joint = extend(uniform_bit(), k)
        assert np.allclose(joint.weights, np.array([[0.5, 0.0], [0.5, 0.0]]))

    def test_bsc_hand_value(self):
        base = JointPmf(variables=(("X", 2),), weights=np.array([0.25, 0.75]))
        joint = extend(base, bsc_kernel("X", "Y", 0.1))
        p_y1 = marginalize(joint, ("Y",)).weights[1]
        assert p_y1 == pytest.approx(0.25 * 0.1 + 0.75 * 0.9, abs=1e-12)

    def test_marginal_over_base_unchanged(self):
        base = JointPmf(variables=(("X", 2),), weights=np.array([0.25, 0.75]))
        joint = extend(base, bsc_kernel("X", "Y", 0.3))
        back = marginalize(joint, ("X",))
        assert np.allclose(back.weights, base.weights, atol=1e-12)

    def test_missing_input_label(self):
        with pytest.raises(LabelError):
            extend(uniform_bit("Z"), identity_kernel("X", "Y"))

    def test_duplicate_output_label(self):
        with pytest.raises(LabelError):
            extend(uniform_bit("X"), identity_kernel("X", "X"))


class TestMarginalize:
    def test_independent_bits(self):
        joint = JointPmf(variables=(("X", 2), ("Y", 2)), weights=np.full((2, 2), 0.25))
        m = marginalize(joint, ("X",))
        assert m.labels == ("X",)
        assert np.allclose(m.weights, [0.5, 0.5])

    def test_keep_all_is_identity(self):
        joint = JointPmf(variables=(("X", 2), ("Y", 3)), weights=np.full((2, 3), 1 / 6))
        m = marginalize(joint, ("X", "Y"))
        assert np.allclose(m.weights, joint.weights)

    def test_correlated_bits(self):
        joint = extend(uniform_bit(), identity_kernel("X", "Y"))
        m = marginalize(joint, ("Y",))
        assert np.allclose(m.weights, [0.5, 0.5])

    def test_unknown_label(self):
        with pytest.raises(LabelError):
            marginalize(uniform_bit(), ("Y",))


class TestEntropy:
    def test_uniform_bit(self):
        assert entropy(uniform_bit(), "X") == pytest.approx(1.0, abs=1e-12)

    def test_copy_conditional(self):
        joint = extend(uniform_bit(), identity_kernel("X", "Y"))
        assert entropy(joint, "Y", "X") == pytest.approx(0.0, abs=1e-12)

    def test_skewed_bit(self):
        pmf = JointPmf(variables=(("X", 2),), weights=np.array([0.25, 0.75]))
        assert entropy(pmf, "X") == pytest.approx(0.811278, abs=1e-6)

    def test_zero_mass_convention(self):
        pmf = JointPmf(variables=(("X", 2),), weights=np.array([1.0, 0.0]))
        assert entropy(pmf, "X") == pytest.approx(0.0, abs=1e-12)


class TestMutualInformation:
    def test_independent_bits(self):
        joint = JointPmf(variables=(("X", 2), ("Y", 2)), weights=np.full((2, 2), 0.25))
        assert mutual_information(joint, "X", "Y") == pytest.approx(0.0, abs=1e-12)

    def test_copy(self):
        joint = extend(uniform_bit(), identity_kernel("X", "Y"))
        assert mutual_information(joint, "X", "Y") == pytest.approx(1.0, abs=1e-12)

    def test_bsc_hand_value(self):
        joint = extend(uniform_bit(), bsc_kernel("X", "Y", 0.1))
        h2 = -(0.1 * math.log2(0.1) + 0.9 * math.log2(0.9))
        assert mutual_information(joint, "X", "Y") == pytest.approx(1.0 - h2, abs=1e-9)
        assert mutual_information(joint, "X", "Y") == pytest.approx(0.531004, abs=1e-6)


class TestProperties:
    def test_chain_rule_and_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            joint = random_joint(rng, {"A": 2, "B": 3, "C": 2})
            lhs = entropy(joint, ("A", "B"), ("C",))
            rhs = entropy(joint, ("A",), ("C",)) + entropy(joint, ("B",), ("A", "C"))
            assert lhs == pytest.approx(rhs, abs=1e-9)
            assert mutual_information(joint, "A", "B", "C") >= -1e-12
            assert mutual_information(joint, "A", "B", "C") == pytest.approx(
                mutual_information(joint, "B", "A", "C"), abs=1e-9
            )

    def test_conditioning_reduces_entropy(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            joint = random_joint(rng, {"A": 3, "B": 2})
            h_cond = entropy(joint, "A", "B")
            h = entropy(joint, "A")
            assert h_cond <= h + 1e-9
            assert h <= math.log2(3) + 1e-9

    def test_extend_marginalize_roundtrip(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            base = random_joint(rng, {"X": 3})
            k = Kernel(
                inputs=("X",),
                outputs=(("Y", 2),),
                weights=rng.dirichlet(np.ones(2), size=3),
            )
            joint = extend(base, k)
            back = marginalize(joint, ("X",))
            assert np.allclose(back.weights, base.weights, atol=1e-12)

import numpy as np
import pytest

from noisytomo.channels import (QuantumChannel, amplitude_relaxation, bit_flip,
                                channel_from_config, closed_form_operator,
                                fold_channel, identity_channel, make_channel,
                                phase_flip, pure_dephasing, tensor_channel)
from noisytomo.core import bloch_to_projector
from noisytomo.protocols import (PROTOCOL_KINDS, EffectiveMeasurement,
                                 build_protocol, measurement_operators)

KINDS_WITH_PARAMS = [
    ("amplitude_relaxation", lambda rng: {"t": rng.uniform(0, 3)}),
    ("pure_dephasing", lambda rng: {"t": rng.uniform(0, 3)}),
    ("bit_flip", lambda rng: {"p": rng.uniform(0, 0.5)}),
    ("phase_flip", lambda rng: {"p": rng.uniform(0, 0.5)}),
]


def single_op_measurement(op):
    return EffectiveMeasurement(np.asarray(op)[None, :, :], np.array([1.0]), 1.0)


def random_unit(rng):
    r = rng.standard_normal(3)
    return r / np.linalg.norm(r)


class TestMakeChannel:
    def test_amplitude_t0_is_identity(self):
        ch = amplitude_relaxation(0.0)
        assert len(ch.kraus) == 1
        np.testing.assert_allclose(ch.kraus[0], np.eye(2), atol=1e-15)

    def test_bit_flip_p0(self):
        ch = bit_flip(0.0)
        assert len(ch.kraus) == 1
        np.testing.assert_allclose(ch.kraus[0], np.eye(2), atol=1e-15)

    def test_amplitude_half_life(self):
        ch = amplitude_relaxation(np.log(2), T1=1.0)
        np.testing.assert_allclose(ch.kraus[0], np.diag([1, 1 / np.sqrt(2)]),
                                   atol=1e-14)

    def test_trace_preservation(self):
        rng = np.random.default_rng(7)
        for kind, draw in KINDS_WITH_PARAMS:
            for _ in range(20):
                ch = make_channel(kind, **draw(rng))
                total = sum(e.conj().T @ e for e in ch.kraus)
                np.testing.assert_allclose(total, np.eye(2), atol=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            amplitude_relaxation(-1.0)
        with pytest.raises(ValueError):
            bit_flip(0.6)
        with pytest.raises(ValueError):
            pure_dephasing(1.0, T2pure=0.0)

    def test_rejects_non_trace_preserving(self):
        with pytest.raises(ValueError):
            QuantumChannel((0.5 * np.eye(2),))


class TestFoldChannel:
    def test_identity_leaves_unchanged(self):
        meas = measurement_operators(build_protocol("tetrahedron"))
        folded = fold_channel(meas, identity_channel())
        np.testing.assert_allclose(folded.operators, meas.operators, atol=1e-15)

    def test_amplitude_on_z_projector(self):
        # oracle: closed-form fuzzy matrix at r=(0,0,1), exp(-t/T1)=1/2
        t = np.log(2)
        meas = single_op_measurement(bloch_to_projector([0, 0, 1]))
        folded = fold_channel(meas, amplitude_relaxation(t))
        np.testing.assert_allclose(folded.operators[0], [[1, 0], [0, 0.5]],
                                   atol=1e-14)

    def test_bit_flip_on_x_projector(self):
        meas = single_op_measurement(bloch_to_projector([1, 0, 0]))
        folded = fold_channel(meas, bit_flip(0.1))
        np.testing.assert_allclose(folded.operators[0],
                                   0.5 * np.array([[1, 1], [1, 1]]), atol=1e-14)

    def test_kraus_vs_closed_form_500(self):
        # central correctness theorem: both routes agree entrywise
        rng = np.random.default_rng(8)
        for _ in range(500):
            r = random_unit(rng)
            kind, draw = KINDS_WITH_PARAMS[rng.integers(len(KINDS_WITH_PARAMS))]
            params = draw(rng)
            meas = single_op_measurement(bloch_to_projector(r))
            folded = fold_channel(meas, make_channel(kind, **params))
            direct = closed_form_operator(r, kind, **params)
            assert np.max(np.abs(folded.operators[0] - direct)) <= 1e-12

    def test_unity_preserved(self):
        rng = np.random.default_rng(9)
        for kind in PROTOCOL_KINDS:
            meas = measurement_operators(build_protocol(kind, n=70.0))
            for ch_kind, draw in KINDS_WITH_PARAMS:
                folded = fold_channel(meas, make_channel(ch_kind, **draw(rng)))
                assert folded.unity_residual() <= 1e-10

    def test_total_probability_law(self):
        rng = np.random.default_rng(10)
        meas = measurement_operators(build_protocol("octahedron"))
        for _ in range(50):
            ch_kind, draw = KINDS_WITH_PARAMS[rng.integers(4)]
            ch = make_channel(ch_kind, **draw(rng))
            a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            rho = a @ a.conj().T
            rho /= np.trace(rho)
            folded = fold_channel(meas, ch)
            for op, fop in zip(meas.operators, folded.operators):
                lhs = np.trace(fop @ rho)
                rhs = np.trace(op @ ch.apply(rho))
                assert abs(lhs - rhs) <= 1e-12

    def test_positivity_and_hermiticity(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            meas = measurement_operators(build_protocol("tetrahedron"))
            ch_kind, draw = KINDS_WITH_PARAMS[rng.integers(4)]
            folded = fold_channel(meas, make_channel(ch_kind, **draw(rng)))
            for op in folded.operators:
                assert np.max(np.abs(op - op.conj().T)) <= 1e-12
                assert np.linalg.eigvalsh(op).min() >= -1e-12

    def test_dimension_mismatch(self):
        meas = measurement_operators(build_protocol("cube"))
        two_qubit = tensor_channel([bit_flip(0.1), bit_flip(0.1)])
        with pytest.raises(ValueError):
            fold_channel(meas, two_qubit)


class TestClosedForm:
    def test_dephasing_long_time_limit(self):
        op = closed_form_operator([1, 0, 0], "pure_dephasing", t=1e9)
        np.testing.assert_allclose(op, 0.5 * np.eye(2), atol=1e-12)

    def test_amplitude_long_time_south_pole(self):
        # full decay leaves nothing to project on |1>: the Kraus route gives
        # E0^dag |1><1| E0 = E1^dag |1><1| E1 = 0, and indeed the +z partner
        # operator absorbs everything (sums to I with this one)
        op = closed_form_operator([0, 0, -1], "amplitude_relaxation", t=1e9)
        np.testing.assert_allclose(op, np.zeros((2, 2)), atol=1e-12)
        partner = closed_form_operator([0, 0, 1], "amplitude_relaxation", t=1e9)
        np.testing.assert_allclose(op + partner, np.eye(2), atol=1e-12)

    def test_phase_flip_equals_dephasing(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            r = random_unit(rng)
            t = rng.uniform(0, 3)
            p = 0.5 * (1 - np.exp(-t))
            a = closed_form_operator(r, "pure_dephasing", t=t)
            b = closed_form_operator(r, "phase_flip", p=p)
            assert np.max(np.abs(a - b)) <= 1e-12


class TestTensorChannel:
    def test_identity_product(self):
        ch = tensor_channel([identity_channel(), identity_channel()])
        assert len(ch.kraus) == 1
        np.testing.assert_allclose(ch.kraus[0], np.eye(4), atol=1e-15)

    def test_single_qubit_block_decay(self):
        # oracle: single-qubit fold tensored with the untouched factor
        t = 0.7
        proj00 = np.zeros((4, 4), dtype=complex)
        proj00[0, 0] = 1.0
        ch = tensor_channel([amplitude_relaxation(t), identity_channel()])
        folded = fold_channel(single_op_measurement_4(proj00), ch)

        proj0 = bloch_to_projector([0, 0, 1])
        single = fold_channel(
            single_op_measurement(proj0), amplitude_relaxation(t)
        ).operators[0]
        expected = np.kron(single, proj0)
        np.testing.assert_allclose(folded.operators[0], expected, atol=1e-14)

    def test_trace_preserving_in_product_dim(self):
        ch = tensor_channel([amplitude_relaxation(0.5), pure_dephasing(0.5)])
        total = sum(e.conj().T @ e for e in ch.kraus)
        np.testing.assert_allclose(total, np.eye(4), atol=1e-12)


def single_op_measurement_4(op):
    return EffectiveMeasurement(np.asarray(op)[None, :, :], np.array([1.0]), 1.0)


class TestChannelFromConfig:
    def test_ratio_parameters(self):
        ch = channel_from_config({"kind": "amplitude_relaxation",
                                  "t_over_T1": 0.8})
        assert ch.params == {"t": 0.8, "T1": 1.0}

    def test_raw_kraus(self):
        e0 = [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]   # |0><0|
        e1 = [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]   # |0><1|
        ch = channel_from_config({"kind": "kraus", "operators": [e0, e1]})
        assert len(ch.kraus) == 2

    def test_raw_kraus_trace_check(self):
        bad = [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]
        with pytest.raises(ValueError):
            channel_from_config({"kind": "kraus", "operators": bad})

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            channel_from_config({"kind": "depolarizing", "p": 0.1})

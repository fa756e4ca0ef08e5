"""Tests for the decomposition core: flattening, SVD pairs, truncation."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hogmt import (
    EigenDecomposition,
    FlattenMap,
    Kernel4D,
    TruncationPolicy,
    apply_kernel,
    decompose_grid_pairs,
    duality_residual,
    flatten_index,
    flatten_kernel,
    frobenius_inner,
    hogmt_decompose,
    reconstruct,
    unflatten_index,
    unflatten_kernel,
)
from hogmt.errors import DimensionMismatchError, ValidationError


def random_kernel(rng, dims):
    vals = rng.standard_normal(dims) + 1j * rng.standard_normal(dims)
    return Kernel4D(vals)


class TestFlattenMap:
    def test_row_major_order(self):
        fm = FlattenMap(n_rows=3, n_cols=5)
        assert flatten_index(0, 0, fm) == 0
        assert flatten_index(0, 4, fm) == 4
        assert flatten_index(1, 0, fm) == 5
        assert flatten_index(2, 3, fm) == 13

    def test_out_of_range_rejected(self):
        fm = FlattenMap(n_rows=2, n_cols=2)
        with pytest.raises(ValidationError):
            flatten_index(2, 0, fm)
        with pytest.raises(ValidationError):
            unflatten_index(4, fm)

    @given(
        n_rows=st.integers(1, 7),
        n_cols=st.integers(1, 7),
        data=st.data(),
    )
    def test_bijection(self, n_rows, n_cols, data):
        fm = FlattenMap(n_rows=n_rows, n_cols=n_cols)
        r = data.draw(st.integers(0, n_rows - 1))
        c = data.draw(st.integers(0, n_cols - 1))
        m = flatten_index(r, c, fm)
        assert 0 <= m < fm.size
        assert unflatten_index(m, fm) == (r, c)


class TestFlattenKernel:
    def test_matches_elementwise_oracle(self):
        rng = np.random.default_rng(7)
        dims = (2, 3, 4, 3)
        kern = random_kernel(rng, dims)
        flat = flatten_kernel(kern)
        l_u, l_t, l_up, _ = dims
        assert flat.shape == (l_u * l_t, l_up * l_t)
        # independent quadruple loop over every entry
        for u in range(l_u):
            for t in range(l_t):
                for up in range(l_up):
                    for tp in range(l_t):
                        assert flat[u * l_t + t, up * l_t + tp] == kern.values[u, t, up, tp]

    def test_unflatten_inverts(self):
        rng = np.random.default_rng(8)
        kern = random_kernel(rng, (3, 5, 2, 5))
        back = unflatten_kernel(flatten_kernel(kern), kern.dims)
        np.testing.assert_array_equal(back.values, kern.values)


class TestKernel4DValidation:
    def test_rejects_non_4d(self):
        with pytest.raises(ValidationError):
            Kernel4D(np.zeros((2, 2, 2), dtype=complex))

    def test_rejects_mismatched_time_axes(self):
        with pytest.raises(ValidationError):
            Kernel4D(np.zeros((2, 3, 2, 4), dtype=complex))

    def test_rejects_non_finite(self):
        vals = np.zeros((1, 2, 1, 2), dtype=complex)
        vals[0, 0, 0, 0] = np.nan
        with pytest.raises(ValidationError):
            Kernel4D(vals)

    def test_frob_norm(self):
        rng = np.random.default_rng(3)
        kern = random_kernel(rng, (2, 3, 2, 3))
        assert kern.frob_norm == pytest.approx(np.linalg.norm(kern.values))

    def test_values_are_frozen(self):
        kern = Kernel4D(np.zeros((1, 2, 1, 2), dtype=complex))
        with pytest.raises(ValueError):
            kern.values[0, 0, 0, 0] = 1.0


class TestDecomposition:
    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(11)
        kern = random_kernel(rng, (3, 6, 2, 6))
        dec = hogmt_decompose(kern)
        rec = reconstruct(dec)
        err = np.linalg.norm(rec.values - kern.values) / kern.frob_norm
        assert err <= 1e-12, f"reconstruction error {err}"

        n = dec.n_modes
        psi_flat = dec.psis.reshape(n, -1)
        phi_flat = dec.phis.reshape(n, -1)
        gram_psi = psi_flat @ psi_flat.conj().T
        gram_phi = phi_flat @ phi_flat.conj().T
        assert np.abs(gram_psi - np.eye(n)).max() <= 1e-12
        assert np.abs(gram_phi - np.eye(n)).max() <= 1e-12

    def test_duality(self):
        # feeding the conjugated output-side function through the kernel
        # must return sigma times the input-side function, mode by mode
        rng = np.random.default_rng(12)
        kern = random_kernel(rng, (2, 5, 3, 5))
        dec = hogmt_decompose(kern)
        assert duality_residual(kern, dec) <= 1e-12
        for nmode in (0, dec.n_modes // 2, dec.n_modes - 1):
            probe = np.conj(dec.phis[nmode])
            out = apply_kernel(kern, probe)
            target = dec.sigmas[nmode] * dec.psis[nmode]
            assert np.abs(out - target).max() <= 1e-10 * dec.sigmas[0]

    def test_sigmas_descending_and_lambdas(self):
        rng = np.random.default_rng(13)
        dec = hogmt_decompose(random_kernel(rng, (2, 4, 2, 4)))
        assert np.all(np.diff(dec.sigmas) <= 0)
        np.testing.assert_allclose(dec.lambdas, dec.sigmas**2, rtol=0, atol=0)

    def test_phase_convention(self):
        # the largest-magnitude entry of each output-side function is rotated
        # onto the positive real axis, which pins the joint phase of the pair
        rng = np.random.default_rng(14)
        dec = hogmt_decompose(random_kernel(rng, (2, 4, 2, 4)))
        for n in range(dec.n_modes):
            flat = dec.psis[n].ravel()
            peak = flat[np.argmax(np.abs(flat))]
            assert abs(peak.imag) <= 1e-12 * abs(peak)
            assert peak.real > 0

    def test_energy_sum_matches_frobenius(self):
        rng = np.random.default_rng(15)
        kern = random_kernel(rng, (3, 4, 3, 4))
        dec = hogmt_decompose(kern)
        assert np.sum(dec.sigmas**2) == pytest.approx(kern.frob_norm**2, rel=1e-12)

    def test_decompose_rank_one(self):
        a = np.zeros((1, 3, 1, 3), dtype=complex)
        a[0, :, 0, :] = np.outer([1, 2j, -1], [1, 1, 1])
        dec = hogmt_decompose(Kernel4D(a))
        assert dec.n_modes == 1
        rec = reconstruct(dec)
        assert np.abs(rec.values - a).max() <= 1e-12 * np.abs(a).max()

    @settings(max_examples=25, deadline=None)
    @given(
        rows=st.tuples(st.integers(1, 4), st.integers(1, 4)),
        cols=st.tuples(st.integers(1, 4), st.integers(1, 4)),
        seed=st.integers(0, 2**31 - 1),
    )
    def test_grid_pairs_property(self, rows, cols, seed):
        rng = np.random.default_rng(seed)
        shape = rows + cols
        mat = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        flat = mat.reshape(rows[0] * rows[1], cols[0] * cols[1])
        dec = decompose_grid_pairs(flat, rows, cols, TruncationPolicy.full())
        rec = np.einsum("n,nab,ncd->abcd", dec.sigmas, dec.psis, dec.phis)
        scale = max(np.linalg.norm(mat), 1e-30)
        assert np.linalg.norm(rec - mat) / scale <= 1e-10


class TestApplyKernel:
    def test_matches_flat_matvec(self):
        rng = np.random.default_rng(21)
        kern = random_kernel(rng, (3, 4, 2, 4))
        x = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        out = apply_kernel(kern, x)
        flat = flatten_kernel(kern) @ x.ravel()
        np.testing.assert_allclose(out.ravel(), flat, rtol=1e-13, atol=1e-13)

    def test_linearity(self):
        rng = np.random.default_rng(22)
        kern = random_kernel(rng, (2, 3, 2, 3))
        x1 = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        x2 = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        lhs = apply_kernel(kern, 2.0 * x1 - 1j * x2)
        rhs = 2.0 * apply_kernel(kern, x1) - 1j * apply_kernel(kern, x2)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_dimension_check(self):
        rng = np.random.default_rng(23)
        kern = random_kernel(rng, (2, 3, 2, 3))
        with pytest.raises(DimensionMismatchError):
            apply_kernel(kern, np.zeros((3, 3), dtype=complex))


class TestTruncationPolicy:
    def test_full_keeps_all(self):
        sigmas = np.array([4.0, 3.0, 2.0, 1.0])
        assert TruncationPolicy.full().retained_count(sigmas) == 4

    def test_fraction_uses_ceiling(self):
        sigmas = np.linspace(7, 1, 7)
        assert TruncationPolicy.fraction(0.5).retained_count(sigmas) == 4
        assert TruncationPolicy.fraction(1.0).retained_count(sigmas) == 7
        # 0.99 of 48 rounds up to all 48; of 128 it drops exactly one
        assert TruncationPolicy.fraction(0.99).retained_count(np.linspace(48, 1, 48)) == 48
        assert TruncationPolicy.fraction(0.99).retained_count(np.linspace(128, 1, 128)) == 127

    def test_sigma_floor_drops_small_modes(self):
        sigmas = np.array([1.0, 1e-2, 1e-7, 1e-13])
        pol = TruncationPolicy.sigma_floor(1e-6)
        assert pol.retained_count(sigmas) == 2

    def test_caller_floor_combines_with_policy(self):
        sigmas = np.array([1.0, 1e-3, 1e-9])
        pol = TruncationPolicy.full()
        assert pol.retained_count(sigmas, floor_rel=1e-6) == 2
        # the stricter of the two floors wins
        pol2 = TruncationPolicy.sigma_floor(1e-2)
        assert pol2.retained_count(sigmas, floor_rel=1e-6) == 1

    def test_invalid_inputs(self):
        with pytest.raises(ValidationError):
            TruncationPolicy(mode="bogus")
        with pytest.raises(ValidationError):
            TruncationPolicy.fraction(0.0)
        with pytest.raises(ValidationError):
            TruncationPolicy.fraction(1.5)

    def test_truncated_decomposition_mode_count(self):
        rng = np.random.default_rng(31)
        kern = random_kernel(rng, (2, 5, 2, 5))
        dec = hogmt_decompose(kern, policy=TruncationPolicy.fraction(0.5))
        assert dec.n_modes == 5


class TestEigenDecompositionValidation:
    def test_rejects_unsorted_sigmas(self):
        n, shape = 2, (1, 2)
        psis = np.zeros((n,) + shape, dtype=complex)
        psis[:, 0, 0] = 1.0
        with pytest.raises(ValidationError):
            EigenDecomposition(
                sigmas=np.array([1.0, 2.0]),
                psis=psis,
                phis=psis.copy(),
                source_dims=(1, 2, 1, 2),
            )

    def test_rejects_shape_mismatch(self):
        psis = np.zeros((2, 1, 2), dtype=complex)
        phis = np.zeros((2, 1, 3), dtype=complex)
        psis[:, 0, 0] = 1.0
        phis[:, 0, 0] = 1.0
        with pytest.raises(ValidationError):
            EigenDecomposition(
                sigmas=np.array([2.0, 1.0]),
                psis=psis,
                phis=phis,
                source_dims=(1, 2, 1, 2),
            )


class TestReconstructShapes:
    def test_non_kernel_lattice_rejected(self):
        # decompositions over a lattice whose column time-axis differs from
        # the row time-axis cannot be packed back into a channel kernel
        rng = np.random.default_rng(41)
        mat = rng.standard_normal((6, 8)) + 1j * rng.standard_normal((6, 8))
        dec = decompose_grid_pairs(mat, (2, 3), (2, 4), TruncationPolicy.full())
        with pytest.raises(DimensionMismatchError):
            reconstruct(dec)


def test_frobenius_inner_conjugates_second_argument():
    a = np.array([[1.0 + 1j]])
    b = np.array([[2.0 - 3j]])
    # <a,b> = sum a * conj(b)
    assert frobenius_inner(a, b) == pytest.approx((1 + 1j) * (2 + 3j))

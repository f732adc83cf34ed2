import unittest

import numpy as np

from pyselinf.pyselinf_errors import NotPositiveDefinite, ShapeMismatch
from pyselinf.util.linalg import as_sym_matrix, cholesky, solve_pd, inv_pd, is_positive_definite

SPD = np.array([[4.0, 1.0, 0.5],
                [1.0, 3.0, 0.2],
                [0.5, 0.2, 2.0]])


class TestLinalg(unittest.TestCase):

    def test_cholesky_reproduces_matrix(self):
        factor = cholesky(SPD)
        np.testing.assert_allclose(factor @ factor.T, SPD, rtol=1e-14)
        self.assertTrue(np.allclose(factor, np.tril(factor)))

    def test_cholesky_of_singular_matrix_raises_notpositivedefinite(self):
        with self.assertRaises(NotPositiveDefinite):
            cholesky(np.ones((2, 2)))

    def test_cholesky_of_indefinite_matrix_raises_notpositivedefinite(self):
        with self.assertRaises(NotPositiveDefinite):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_cholesky_of_empty_matrix_returns_empty(self):
        self.assertEqual(cholesky(np.zeros((0, 0))).shape, (0, 0))

    def test_non_square_raises_shapemismatch(self):
        with self.assertRaises(ShapeMismatch):
            as_sym_matrix(np.ones((2, 3)))

    def test_asymmetric_raises_valueerror(self):
        with self.assertRaises(ValueError):
            as_sym_matrix(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_round_off_asymmetry_is_removed(self):
        S = SPD.copy()
        S[0, 1] += 1e-14
        result = as_sym_matrix(S)
        self.assertEqual(result[0, 1], result[1, 0])

    def test_solve_pd_solves_system(self):
        rhs = np.array([1.0, -2.0, 0.5])
        np.testing.assert_allclose(SPD @ solve_pd(SPD, rhs), rhs, atol=1e-13)

    def test_inv_pd_is_symmetric_inverse(self):
        inverse = inv_pd(SPD)
        np.testing.assert_array_equal(inverse, inverse.T)
        np.testing.assert_allclose(inverse @ SPD, np.eye(3), atol=1e-13)

    def test_is_positive_definite(self):
        self.assertTrue(is_positive_definite(SPD))
        self.assertFalse(is_positive_definite(-SPD))

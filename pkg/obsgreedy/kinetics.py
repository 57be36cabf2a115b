"""Mass-action chemical reaction network dynamics.

A network of N_r reversible reactions over n_x species evolves as

  dx/dt = Theta psi(x),   Theta[i][j] = w[j][i] - q[j][i]

where the reaction rates are monomials of the concentrations:

  psi_j(x) = v_j prod_i x_i^q[j][i] - b_j prod_i x_i^w[j][i]

q and w hold the forward and backward stoichiometric coefficients, v and b
the forward and backward rate constants.
"""

from __future__ import absolute_import

import unittest

import numpy as np
import scipy.linalg

from obsgreedy import model as core
from obsgreedy.model import DimensionError

class KineticsDomainError(ValueError):
	"""A rate or its derivative is undefined at the given state."""

def _frozen(a, dtype=float):
	a = np.array(a, dtype=dtype)
	a.flags.writeable = False
	return a

class ReactionNetwork(object):
	"""Stoichiometry and rate constants of a mass-action network.

	Instances are immutable; theta is derived from q and w on
	construction and never stored separately.
	"""
	def __init__(self, q, w, v, b, species=None, measurement=None,
	             labels=None):
		self.q = _frozen(np.atleast_2d(q))
		self.w = _frozen(np.atleast_2d(w))
		self.v = _frozen(np.atleast_1d(v))
		self.b = _frozen(np.atleast_1d(b))
		self.n_r, self.n_x = self.q.shape
		if self.w.shape != self.q.shape:
			raise DimensionError("q has shape %r but w has shape %r" % (
				self.q.shape, self.w.shape))
		if self.v.shape != (self.n_r,) or self.b.shape != (self.n_r,):
			raise DimensionError("rate vectors must have length %d" % (
				self.n_r))
		if np.any(self.q < 0) or np.any(self.w < 0):
			raise ValueError("stoichiometric coefficients must be "
			                 "nonnegative")
		if np.any(self.v < 0) or np.any(self.b < 0):
			raise ValueError("negative rate")
		for j in range(self.n_r):
			if not (np.any(self.q[j]) or np.any(self.w[j])):
				raise ValueError("reaction %d has no nonzero "
				                 "coefficient" % (j + 1))
		self.theta = _frozen((self.w - self.q).T)
		if species is None:
			species = ["X%d" % (i + 1) for i in range(self.n_x)]
		if len(species) != self.n_x:
			raise DimensionError("%d species names for %d species" % (
				len(species), self.n_x))
		self.species = tuple(species)
		if labels is None:
			labels = [None] * self.n_r
		self.labels = tuple(labels)
		if measurement is None:
			measurement = np.eye(self.n_x)
		self.measurement = core.measurement_matrix(measurement,
		                                           n_x=self.n_x)

	def __eq__(self, other):
		return (isinstance(other, ReactionNetwork) and
		        self.species == other.species and
		        np.array_equal(self.q, other.q) and
		        np.array_equal(self.w, other.w) and
		        np.array_equal(self.v, other.v) and
		        np.array_equal(self.b, other.b) and
		        np.array_equal(self.measurement, other.measurement))

	def __ne__(self, other):
		return not self == other

	def __repr__(self):
		return "ReactionNetwork(n_x=%d, n_r=%d)" % (self.n_x, self.n_r)

def _check_concentrations(net, x):
	x = np.asarray(x, dtype=float)
	if x.shape != (net.n_x,):
		raise DimensionError("state has shape %r, expected (%d,)" % (
			x.shape, net.n_x))
	negative = x < 0
	if np.any(negative):
		for expo in (net.q, net.w):
			exps = expo[:, negative]
			if np.any(exps != np.round(exps)):
				raise KineticsDomainError(
					"negative concentration with "
					"non-integer exponent")
	return x

def _monomials(x, expo):
	# numpy defines 0.0 ** 0 as 1.
	return np.prod(x[np.newaxis, :] ** expo, axis=1)

def _monomial_gradients(x, expo):
	"""d/dx_i of prod_l x_l^expo[j][l], as an N_r x n_x matrix."""
	result = np.zeros(expo.shape)
	powers = x[np.newaxis, :] ** expo
	for i in range(len(x)):
		active = expo[:, i] != 0
		if not np.any(active):
			continue
		e = expo[active, i]
		if x[i] == 0 and np.any(e < 1):
			raise KineticsDomainError(
				"derivative of x_%d^%r undefined at x_%d = 0" % (
					i + 1, float(e[e < 1][0]), i + 1))
		others = np.prod(np.delete(powers[active], i, axis=1), axis=1)
		result[active, i] = e * x[i] ** (e - 1) * others
	return result

def rate_vector(net, x):
	"""The reaction rates psi(x), one per reaction."""
	x = _check_concentrations(net, x)
	return net.v * _monomials(x, net.q) - net.b * _monomials(x, net.w)

def kinetics_dynamics(net, x):
	"""dx/dt = Theta psi(x)."""
	return net.theta.dot(rate_vector(net, x))

def kinetics_jacobian(net, x):
	"""Exact Jacobian of kinetics_dynamics."""
	x = _check_concentrations(net, x)
	dpsi = (net.v[:, np.newaxis] * _monomial_gradients(x, net.q)
	        - net.b[:, np.newaxis] * _monomial_gradients(x, net.w))
	return net.theta.dot(dpsi)

def network_model(net, name=None):
	"""The ModelSpec of a reaction network; sensors are its C rows."""
	return core.ModelSpec(
		lambda x: kinetics_dynamics(net, x),
		net.measurement,
		jacobian=lambda x: kinetics_jacobian(net, x),
		name=name or "reaction network",
		nonnegative=True,
	)

def conservation_laws(net):
	"""Orthonormal rows m with m^T Theta = 0 (conserved m^T x)."""
	return scipy.linalg.null_space(net.theta.T).T

def _single(q, w, v, b):
	return ReactionNetwork([q], [w], [v], [b])

class TestKinetics(unittest.TestCase):
	def test_rate_vector(self):
		net = _single([2, 0], [0, 1], 1.0, 0.5)
		np.testing.assert_array_equal(rate_vector(net, [2, 1]), [3.5])
		np.testing.assert_array_equal(net.theta, [[-2], [1]])
		np.testing.assert_array_equal(kinetics_dynamics(net, [2, 1]),
		                              [-7.0, 3.5])

	def test_zero_rates(self):
		net = _single([2, 0], [0, 1], 0.0, 0.0)
		np.testing.assert_array_equal(rate_vector(net, [4, 3]), [0.0])
		np.testing.assert_array_equal(kinetics_dynamics(net, [4, 3]),
		                              [0.0, 0.0])
		np.testing.assert_array_equal(kinetics_jacobian(net, [4, 3]),
		                              np.zeros((2, 2)))

	def test_reversible_chain(self):
		# A <=> B <=> C with v = (2, 3) and b = (0.5, 0.25)
		net = ReactionNetwork([[1, 0, 0], [0, 1, 0]],
		                      [[0, 1, 0], [0, 0, 1]],
		                      [2.0, 3.0], [0.5, 0.25])
		x = np.array([1.5, 0.4, 2.0])
		psi = [2.0 * 1.5 - 0.5 * 0.4, 3.0 * 0.4 - 0.25 * 2.0]
		np.testing.assert_allclose(rate_vector(net, x), psi,
		                           rtol=1e-15)
		np.testing.assert_allclose(
			kinetics_dynamics(net, x),
			[-psi[0], psi[0] - psi[1], psi[1]], rtol=1e-15)

	def test_linear_reaction_jacobian(self):
		net = ReactionNetwork([[1, 0]], [[0, 1]], [1.0], [0.0])
		J = kinetics_jacobian(net, [2.0, 0.0])
		self.assertEqual(J[0, 0], -1.0)
		self.assertEqual(J[1, 0], 1.0)

	def test_jacobian_matches_fd(self):
		from obsgreedy import networks
		rng = np.random.default_rng(11)
		for net in (networks.DESK6, networks.H2O2_SURROGATE):
			m = network_model(net)
			for _ in range(10):
				x = rng.uniform(0.05, 2.0, size=net.n_x)
				self.assertLessEqual(core.max_relative_difference(
					kinetics_jacobian(net, x),
					core.fd_jacobian(m, x)), 1e-5)

	def test_conservation_laws(self):
		from obsgreedy import networks
		net = networks.DESK6
		laws = conservation_laws(net)
		self.assertEqual(laws.shape, (2, net.n_x))
		np.testing.assert_allclose(laws.dot(net.theta), 0, atol=1e-12)
		x = np.array([1.0, 0.6, 0.1, 0.2, 0.1, 0.3])
		np.testing.assert_allclose(
			laws.dot(kinetics_dynamics(net, x)), 0, atol=1e-12)

	def test_domain_errors(self):
		net = ReactionNetwork([[0.5, 0]], [[0, 1]], [1.0], [1.0])
		with self.assertRaises(KineticsDomainError):
			rate_vector(net, [-1.0, 1.0])
		with self.assertRaises(KineticsDomainError):
			kinetics_jacobian(net, [0.0, 1.0])

	def test_invalid_network(self):
		with self.assertRaises(ValueError):
			_single([1, 0], [0, 1], -1.0, 0.0)
		with self.assertRaises(ValueError):
			_single([0, 0], [0, 0], 1.0, 0.0)
		with self.assertRaises(DimensionError):
			ReactionNetwork([[1, 0]], [[0, 1, 0]], [1.0], [0.0])

if __name__ == "__main__":
	unittest.main()

"""Sensitivities of a trajectory to its initial state.

xi_i = dx_i/dx_0 is propagated forward with xi_0 = I and
xi_{i+1} = (dx_{i+1}/dx_i) xi_i, using the stage values stored in the
trajectory.
"""

from __future__ import absolute_import

import unittest

import numpy as np

from obsgreedy import integrator
from obsgreedy import model as core

class SensitivityStack(object):
	"""The matrices xi_0..xi_{N-1}, as an N x n_x x n_x array."""

	def __init__(self, xis):
		self.xis = np.array(xis, dtype=float)
		self.xis.flags.writeable = False

	def __len__(self):
		return len(self.xis)

	def __getitem__(self, i):
		return self.xis[i]

	def stacked(self):
		"""The N*n_x x n_x matrix with the xi_i stacked vertically."""
		return self.xis.reshape((-1, self.xis.shape[2]))

	def __repr__(self):
		return "SensitivityStack(N=%d, n_x=%d)" % self.xis.shape[:2]

def propagate_sensitivities(model, traj, cfg):
	"""Forward matrix recursion along a simulated trajectory."""
	n = model.n_x
	xis = np.empty((len(traj), n, n))
	xis[0] = np.eye(n)
	for i in range(len(traj) - 1):
		step = integrator.step_jacobian(
			model, traj.states[i], traj.stages[i], cfg, step=i)
		xis[i + 1] = step.dot(xis[i])
	return SensitivityStack(xis)

def fd_sensitivity(model, x0, N, cfg, h=None):
	"""Central differences of whole re-simulations from x0 +- h e_i.

	By default h_i = 1e-6 * max(1, |x0_i|).
	"""
	x0 = core.as_state(model, x0)
	columns = core.central_difference(
		lambda z: integrator.simulate(model, z, N, cfg).states, x0, h)
	return SensitivityStack(columns)

class TestSensitivity(unittest.TestCase):
	def test_zero_dynamics(self):
		m = core.zero_model(3)
		cfg = integrator.IrkConfig(0.1)
		traj = integrator.simulate(m, [1.0, 2.0, 3.0], 4, cfg)
		stack = propagate_sensitivities(m, traj, cfg)
		self.assertEqual(len(stack), 4)
		for xi in stack.xis:
			np.testing.assert_array_equal(xi, np.eye(3))
		fd = fd_sensitivity(m, [1.0, 2.0, 3.0], 4, cfg)
		np.testing.assert_allclose(fd.xis, stack.xis, atol=1e-9)

	def test_linear_powers(self):
		A = np.array([[-1.0, 0.5], [0.0, -2.0]])
		T = 0.1
		m = core.linear_model(A)
		cfg = integrator.IrkConfig(T)
		traj = integrator.simulate(m, [1.0, 1.0], 6, cfg)
		stack = propagate_sensitivities(m, traj, cfg)
		Z = T * A
		I = np.eye(2)
		R = np.linalg.solve(I - 2 * Z / 3 + Z.dot(Z) / 6, I + Z / 3)
		for i, xi in enumerate(stack.xis):
			np.testing.assert_allclose(
				xi, np.linalg.matrix_power(R, i), atol=1e-12)
		self.assertEqual(stack.stacked().shape, (12, 2))

	def test_scalar_fd(self):
		lam, T = -0.7, 0.05
		m = core.linear_model([[lam]])
		cfg = integrator.IrkConfig(T)
		fd = fd_sensitivity(m, [2.0], 8, cfg, h=1e-6)
		R = integrator.stability_function(lam * T)
		for i, xi in enumerate(fd.xis):
			self.assertAlmostEqual(xi[0, 0], R ** i, delta=1e-6)

	def test_fd_richardson(self):
		# Halving h should change the FD estimate by O(h^2).
		A = np.array([[0.0, 1.0], [-1.0, 0.0]])
		m = core.ModelSpec(lambda x: A.dot(x) - 0.5 * x ** 3,
		                   np.eye(2),
		                   jacobian=lambda x: A - np.diag(1.5 * x ** 2))
		cfg = integrator.IrkConfig(0.05)
		x0 = [0.9, -0.3]
		coarse = fd_sensitivity(m, x0, 10, cfg, h=1e-3).xis
		fine = fd_sensitivity(m, x0, 10, cfg, h=5e-4).xis
		exact = propagate_sensitivities(
			m, integrator.simulate(m, x0, 10, cfg), cfg).xis
		self.assertLess(np.max(np.abs(fine - exact)),
		                np.max(np.abs(coarse - exact)))
		self.assertLess(np.max(np.abs(coarse - fine)), 1e-5)

	def test_chain_rule(self):
		from obsgreedy import kinetics, networks
		m = kinetics.network_model(networks.DESK6)
		cfg = integrator.IrkConfig(1e-3)
		N, split = 30, 12
		traj = integrator.simulate(m, networks.DESK6_X_TRUE, N, cfg)
		full = propagate_sensitivities(m, traj, cfg)
		tail_traj = integrator.simulate(m, traj.states[split],
		                                N - split, cfg)
		tail = propagate_sensitivities(m, tail_traj, cfg)
		composed = tail.xis[-1].dot(full.xis[split])
		self.assertLessEqual(
			core.max_relative_difference(composed, full.xis[-1]),
			1e-10)

	def test_against_fd_desk6(self):
		from obsgreedy import kinetics, networks
		m = kinetics.network_model(networks.DESK6)
		cfg = integrator.IrkConfig(1e-3)
		x0 = networks.DESK6_X_TRUE
		traj = integrator.simulate(m, x0, 20, cfg)
		stack = propagate_sensitivities(m, traj, cfg)
		fd = fd_sensitivity(m, x0, 20, cfg)
		self.assertLessEqual(
			core.max_relative_difference(stack.xis, fd.xis), 1e-5)

	def test_against_fd_h2o2_surrogate(self):
		from obsgreedy import kinetics, networks
		m = kinetics.network_model(networks.H2O2_SURROGATE)
		cfg = integrator.IrkConfig(1e-5)
		x0 = networks.H2O2_X_TRUE + 0.01
		traj = integrator.simulate(m, x0, 20, cfg)
		stack = propagate_sensitivities(m, traj, cfg)
		fd = fd_sensitivity(m, x0, 20, cfg)
		self.assertEqual(stack.xis.shape, (20, 9, 9))
		self.assertLessEqual(
			core.max_relative_difference(stack.xis, fd.xis), 1e-5)

if __name__ == "__main__":
	unittest.main()

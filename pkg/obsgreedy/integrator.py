"""Two-stage implicit Runge-Kutta discretization of the dynamics.

Each step from x to x+ solves the stage equations

  z1 = x + (T/4)  (f(z1) - f(z2))
  z2 = x + (T/12) (3 f(z1) + 5 f(z2))

by Newton's method and then sets

  x+ = x + (T/4) (f(z1) + 3 f(z2)).

This is the two-stage Radau IA scheme (order 3, L-stable), suitable for
stiff networks. The converged stages are kept with the trajectory so that
step derivatives can be formed later without solving the stages again.
"""

from __future__ import absolute_import

import logging
import unittest

import numpy as np
import scipy.linalg
import scipy.linalg.lapack

from obsgreedy import model as core
from obsgreedy.model import NumericalError

logger = logging.getLogger(__name__)

PREDICTORS = ("constant", "euler")

class IntegrationError(NumericalError):
	"""Newton iteration on the stage equations did not converge."""

	def __init__(self, step, residual, message=None):
		self.step = step
		self.residual = residual
		super(IntegrationError, self).__init__(
			message or "Newton iteration failed at step %d "
			"(residual %.3g)" % (step, residual))

class SingularStageError(NumericalError):
	"""The linearized stage system could not be solved."""

	def __init__(self, condition, step=None):
		self.condition = condition
		self.step = step
		super(SingularStageError, self).__init__(
			"singular stage system%s (condition estimate %.3g)" % (
				"" if step is None else " at step %d" % step,
				condition))

class IrkConfig(object):
	"""Step size and Newton settings for the implicit scheme.

	The stage residual must fall below newton_tol * max(1, |x_k|_inf).
	'predictor' picks the Newton starting point: "constant" starts both
	stages at x_k, "euler" uses explicit Euler to the stage times.
	"""
	def __init__(self, T, newton_tol=1e-12, newton_max_iters=50,
	             predictor="constant"):
		if not T > 0:
			raise ValueError("step size T must be positive")
		if not newton_tol > 0:
			raise ValueError("newton_tol must be positive")
		if int(newton_max_iters) < 1:
			raise ValueError("newton_max_iters must be at least 1")
		if predictor not in PREDICTORS:
			raise ValueError("unknown predictor %r" % predictor)
		self.T = float(T)
		self.newton_tol = float(newton_tol)
		self.newton_max_iters = int(newton_max_iters)
		self.predictor = predictor

	def __repr__(self):
		return "IrkConfig(T=%r, newton_tol=%r, newton_max_iters=%d)" % (
			self.T, self.newton_tol, self.newton_max_iters)

class Trajectory(object):
	"""States x_0..x_{N-1} and the stage pairs of every step.

	'states' is an N x n_x array; 'stages' is (N-1) x 2 x n_x, where
	stages[k] holds the converged (z1, z2) of the step from states[k].
	"""
	def __init__(self, states, stages):
		self.states = np.array(states, dtype=float)
		self.stages = np.array(stages, dtype=float).reshape(
			(len(self.states) - 1, 2, self.states.shape[1]))
		self.states.flags.writeable = False
		self.stages.flags.writeable = False

	def __len__(self):
		return len(self.states)

	def __repr__(self):
		return "Trajectory(N=%d, n_x=%d)" % self.states.shape

def stability_function(z):
	"""R(z) such that one step of dx/dt = lambda x gives R(lambda T) x."""
	return (1 + z / 3.0) / (1 - 2 * z / 3.0 + z * z / 6.0)

def stage_matrix(J1, J2, T):
	"""Jacobian of the stage equations with respect to (z1, z2)."""
	n = J1.shape[0]
	I = np.eye(n)
	return np.block([
		[I - (T / 4.0) * J1, (T / 4.0) * J2],
		[-(T / 4.0) * J1, I - (5.0 * T / 12.0) * J2],
	])

def _stage_residual(model, x, z1, z2, T):
	f1 = core.eval_dynamics(model, z1)
	f2 = core.eval_dynamics(model, z2)
	r1 = z1 - x - (T / 4.0) * (f1 - f2)
	r2 = z2 - x - (T / 12.0) * (3 * f1 + 5 * f2)
	return np.concatenate([r1, r2]), f1, f2

def _factor(M, step=None):
	"""LU factors of a stage matrix with a reciprocal condition check."""
	with np.errstate(all="ignore"):
		lu = scipy.linalg.lu_factor(M, check_finite=False)
	if not np.all(np.isfinite(lu[0])) or np.any(np.diag(lu[0]) == 0):
		raise SingularStageError(np.inf, step=step)
	gecon, = scipy.linalg.lapack.get_lapack_funcs(("gecon",), (lu[0],))
	rcond, info = gecon(lu[0], np.linalg.norm(M, 1), norm="1")
	if info != 0 or not rcond >= len(M) * np.finfo(float).eps:
		raise SingularStageError(
			1.0 / rcond if rcond > 0 else np.inf, step=step)
	return lu

def _solve(lu, rhs, M, step=None):
	with np.errstate(all="ignore"):
		result = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
	if not np.all(np.isfinite(result)):
		raise SingularStageError(np.linalg.cond(M), step=step)
	return result

def irk_step(model, x_k, cfg, step=0):
	"""Advance one step from x_k.

	Returns (x_next, (z1, z2)). Raises IntegrationError if the stage
	residual is still above tolerance after newton_max_iters updates.
	Once the tolerance is met, one chord correction with the last
	factorization pushes the stages down to rounding level.
	"""
	x = core.as_state(model, x_k)
	T = cfg.T
	n = model.n_x
	tol = cfg.newton_tol * max(1.0, np.max(np.abs(x)))
	if cfg.predictor == "euler":
		f0 = core.eval_dynamics(model, x)
		z = np.concatenate([x, x + (2.0 * T / 3.0) * f0])
	else:
		z = np.concatenate([x, x])

	residual = np.inf
	lu = None
	for iteration in range(cfg.newton_max_iters + 1):
		if not np.all(np.isfinite(z)):
			break
		try:
			r, f1, f2 = _stage_residual(model, x, z[:n], z[n:], T)
		except (ValueError, ArithmeticError):
			break
		residual = np.max(np.abs(r))
		if residual <= tol:
			if lu is not None and residual > 0:
				z, f1, f2 = _polish(model, x, z, r, f1, f2, lu, T)
			x_next = x + (T / 4.0) * (f1 + 3 * f2)
			logger.debug("step %d: converged after %d Newton "
			             "iterations", step, iteration)
			return x_next, (z[:n].copy(), z[n:].copy())
		if iteration == cfg.newton_max_iters:
			break
		try:
			M = stage_matrix(core.eval_jacobian(model, z[:n]),
			                 core.eval_jacobian(model, z[n:]), T)
			lu = _factor(M, step=step)
			z = z - _solve(lu, r, M, step=step)
		except SingularStageError as e:
			raise IntegrationError(step, residual, str(e))

	raise IntegrationError(step, residual)

def _polish(model, x, z, r, f1, f2, lu, T):
	n = len(x)
	with np.errstate(all="ignore"):
		polished = z - scipy.linalg.lu_solve(lu, r, check_finite=False)
	if not np.all(np.isfinite(polished)):
		return z, f1, f2
	try:
		r2, g1, g2 = _stage_residual(model, x, polished[:n],
		                             polished[n:], T)
	except (ValueError, ArithmeticError):
		return z, f1, f2
	if np.max(np.abs(r2)) <= np.max(np.abs(r)):
		return polished, g1, g2
	return z, f1, f2

def simulate(model, x0, N, cfg):
	"""Run N-1 steps from x0, giving a trajectory of N states."""
	N = int(N)
	if N < 1:
		raise ValueError("observation window N must be at least 1")
	x = core.as_state(model, x0)
	states = [x]
	stages = []
	for k in range(N - 1):
		x, zs = irk_step(model, x, cfg, step=k)
		states.append(x)
		stages.append(zs)
	logger.debug("simulated %d states of %r", N, model)
	return Trajectory(states, np.reshape(stages, (N - 1, 2, model.n_x)))

def step_jacobian(model, x_k, stages, cfg, step=None):
	"""Derivative of the step map x_k -> x_{k+1}.

	Differentiating the stage equations implicitly gives a 2n x 2n
	linear system for (dz1/dx, dz2/dx) with right-hand side [I; I].
	"""
	z1, z2 = stages
	n = model.n_x
	T = cfg.T
	J1 = core.eval_jacobian(model, z1)
	J2 = core.eval_jacobian(model, z2)
	I = np.eye(n)
	M = stage_matrix(J1, J2, T)
	dz = _solve(_factor(M, step=step), np.vstack([I, I]), M, step=step)
	return I + (T / 4.0) * (J1.dot(dz[:n]) + 3 * J2.dot(dz[n:]))

def _rk4_reference(f, x, t, substeps):
	h = t / substeps
	for _ in range(substeps):
		k1 = f(x)
		k2 = f(x + h / 2 * k1)
		k3 = f(x + h / 2 * k2)
		k4 = f(x + h * k3)
		x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
	return x

class TestIntegrator(unittest.TestCase):
	def test_zero_dynamics(self):
		model = core.zero_model(2)
		x = np.array([1.0, -2.0])
		x_next, (z1, z2) = irk_step(model, x, IrkConfig(0.1))
		np.testing.assert_array_equal(x_next, x)
		np.testing.assert_array_equal(z1, x)
		np.testing.assert_array_equal(z2, x)
		traj = simulate(model, x, 5, IrkConfig(0.1))
		self.assertEqual(len(traj), 5)
		for state in traj.states:
			np.testing.assert_array_equal(state, x)
		np.testing.assert_array_equal(
			step_jacobian(model, x, (z1, z2), IrkConfig(0.1)),
			np.eye(2))

	def test_single_state(self):
		traj = simulate(core.zero_model(1), [3.0], 1, IrkConfig(0.1))
		self.assertEqual(traj.states.shape, (1, 1))
		self.assertEqual(traj.stages.shape, (0, 2, 1))

	def test_stability_function(self):
		for z in (-0.1, -1.0, -10.0):
			model = core.linear_model([[z]])
			cfg = IrkConfig(1.0)
			x_next, stages = irk_step(model, [1.0], cfg)
			self.assertAlmostEqual(x_next[0], stability_function(z),
			                       delta=1e-12)
			J = step_jacobian(model, [1.0], stages, cfg)
			self.assertAlmostEqual(J[0, 0], stability_function(z),
			                       delta=1e-12)

	def test_stability_function_value(self):
		# One step of f = -x with T = 0.1.
		model = core.linear_model([[-1.0]])
		x_next, _ = irk_step(model, [1.0], IrkConfig(0.1))
		expected = (1 - 0.1 / 3) / (1 + 0.2 / 3 + 0.01 / 6)
		self.assertAlmostEqual(x_next[0], expected, delta=1e-14)

	def test_cubic_against_rk4(self):
		# The local error is about (T f')^4 / 72, roughly 1e-8 for
		# T = 0.01 here, so the tight comparison uses a smaller step.
		model = core.polynomial_model(-1.0, 3)
		for T, tolerance in ((0.01, 5e-8), (0.002, 1e-9)):
			x_next, _ = irk_step(model, [1.0], IrkConfig(T))
			reference = _rk4_reference(lambda x: -x ** 3,
			                           np.array([1.0]), T, 1000)
			self.assertAlmostEqual(x_next[0], reference[0],
			                       delta=tolerance)

	def test_order_three(self):
		model = core.polynomial_model(-1.0, 3)
		exact = 1.0 / np.sqrt(3.0)
		errors = []
		for T in (1e-2, 5e-3, 2.5e-3):
			N = int(round(1.0 / T)) + 1
			traj = simulate(model, [1.0], N, IrkConfig(T))
			errors.append(abs(traj.states[-1][0] - exact))
		for coarse, fine in zip(errors, errors[1:]):
			self.assertGreaterEqual(coarse / fine, 6.0)
			self.assertLessEqual(coarse / fine, 10.0)

	def test_non_convergence(self):
		# Stiff cubic decay from far away with a huge step.
		model = core.polynomial_model(-1.0, 3)
		cfg = IrkConfig(1e3, newton_max_iters=2)
		with self.assertRaises(IntegrationError) as cm:
			simulate(model, [10.0], 3, cfg)
		self.assertEqual(cm.exception.step, 0)
		self.assertGreater(cm.exception.residual, cfg.newton_tol)

	def test_euler_predictor(self):
		model = core.polynomial_model(-1.0, 3)
		a, _ = irk_step(model, [1.0], IrkConfig(0.01))
		b, _ = irk_step(model, [1.0], IrkConfig(0.01, predictor="euler"))
		self.assertAlmostEqual(a[0], b[0], delta=1e-12)

	def test_step_jacobian_linear_matrix(self):
		A = np.array([[-1.0, 2.0], [-0.5, -3.0]])
		T = 0.2
		model = core.linear_model(A)
		cfg = IrkConfig(T)
		x = np.array([0.3, -0.1])
		_, stages = irk_step(model, x, cfg)
		I = np.eye(2)
		# R(TA) = (I - 2TA/3 + (TA)^2/6)^-1 (I + TA/3)
		Z = T * A
		expected = np.linalg.solve(I - 2 * Z / 3 + Z.dot(Z) / 6,
		                           I + Z / 3)
		np.testing.assert_allclose(
			step_jacobian(model, x, stages, cfg), expected,
			rtol=0, atol=1e-10)

	def test_singular_stage_system(self):
		# T * eig(A) = 2 +- i sqrt(2) are the poles of R.
		s = np.sqrt(2.0)
		model = core.linear_model([[2.0, -s], [s, 2.0]])
		cfg = IrkConfig(1.0)
		x = np.array([1.0, 0.5])
		with self.assertRaises(SingularStageError) as cm:
			step_jacobian(model, x, (x, x), cfg, step=4)
		self.assertEqual(cm.exception.step, 4)
		self.assertGreater(cm.exception.condition, 1e12)
		with self.assertRaises(IntegrationError) as cm:
			irk_step(model, x, cfg, step=0)
		self.assertIn("singular", str(cm.exception))
		# A well-conditioned step next to it still passes.
		step_jacobian(model, x, (x, x), IrkConfig(0.1))

	def test_step_jacobian_fd(self):
		A = np.array([[0.0, 1.0], [-1.0, 0.0]])
		m = core.ModelSpec(
			lambda x: A.dot(x) - x ** 3,
			np.eye(2),
			jacobian=lambda x: A - np.diag(3 * x ** 2))
		cfg = IrkConfig(0.05)
		x = np.array([0.8, -0.4])
		_, stages = irk_step(m, x, cfg)
		fd = core.central_difference(
			lambda z: irk_step(m, z, cfg)[0], x)
		self.assertLessEqual(core.max_relative_difference(
			step_jacobian(m, x, stages, cfg), fd), 1e-5)

	def test_conservation(self):
		from obsgreedy import kinetics, networks
		net = networks.DESK6
		m = kinetics.network_model(net)
		traj = simulate(m, networks.DESK6_X_TRUE, 100, IrkConfig(1e-3))
		laws = kinetics.conservation_laws(net)
		totals = traj.states.dot(laws.T)
		np.testing.assert_allclose(totals,
		                           np.broadcast_to(totals[0], totals.shape),
		                           rtol=1e-8, atol=1e-12)

	def test_deterministic(self):
		from obsgreedy import kinetics, networks
		m = kinetics.network_model(networks.DESK6)
		a = simulate(m, networks.DESK6_X_TRUE, 20, IrkConfig(1e-3))
		b = simulate(m, networks.DESK6_X_TRUE, 20, IrkConfig(1e-3))
		self.assertEqual(a.states.tobytes(), b.states.tobytes())
		self.assertEqual(a.stages.tobytes(), b.stages.tobytes())

	def test_bad_config(self):
		with self.assertRaises(ValueError):
			IrkConfig(0.0)
		with self.assertRaises(ValueError):
			IrkConfig(0.1, newton_max_iters=0)

if __name__ == "__main__":
	unittest.main()

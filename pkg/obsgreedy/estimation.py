"""Initial-state estimation from lifted measurements.

Stacking the outputs of the selected sensors over the observation window
gives y = g(x0). Given measurements y_tilde, x0 is recovered by minimizing
h^T Q h with h = y_tilde - g(x0), subject to box bounds on x0. The
residual Jacobian comes from the same sensitivities that build the
Gramian, so the solver never differentiates numerically.
"""

from __future__ import absolute_import

import csv
import logging
import os
import shutil
import tempfile
import unittest

import numpy as np
import scipy.optimize

from obsgreedy import gramian
from obsgreedy import integrator
from obsgreedy import sensitivity
from obsgreedy import model as core
from obsgreedy.model import DimensionError, NumericalError, SensorSet

logger = logging.getLogger(__name__)

class EstimationProblem(object):
	"""Measurements of a sensor set and the constraints on x0.

	y_tilde is time-major: N blocks, each holding the selected sensors
	in ascending order. Q defaults to the identity. Without explicit
	bounds, models with nonnegative states are bounded below by 0 and
	other models are unbounded.
	"""
	def __init__(self, model, S, y_tilde, x0_guess, Q=None, lower=None,
	             upper=None):
		self.model = model
		self.S = SensorSet(S, n_y=model.n_y)
		if not self.S:
			raise DimensionError("at least one sensor is needed")
		self.y_tilde = np.array(y_tilde, dtype=float).reshape(-1)
		if len(self.y_tilde) % len(self.S):
			raise DimensionError("%d measurements do not split into "
			                     "blocks of %d sensors" % (
				len(self.y_tilde), len(self.S)))
		n = model.n_x
		if lower is None:
			lower = np.zeros(n) if model.nonnegative else -np.inf
		if upper is None:
			upper = np.inf
		self.lower = np.array(np.broadcast_to(lower, (n,)), dtype=float)
		self.upper = np.array(np.broadcast_to(upper, (n,)), dtype=float)
		if np.any(self.lower > self.upper):
			raise ValueError("lower bound above upper bound")
		self.x0_guess = core.as_state(model, x0_guess)
		if (np.any(self.x0_guess < self.lower) or
		    np.any(self.x0_guess > self.upper)):
			raise ValueError("initial guess violates the bounds")
		self.Q = None
		if Q is not None:
			self.Q = np.array(Q, dtype=float)
			size = len(self.y_tilde)
			if self.Q.shape != (size, size):
				raise DimensionError("Q must be %d x %d" % (size, size))
			if not np.allclose(self.Q, self.Q.T):
				raise ValueError("Q must be symmetric")
			if np.min(np.linalg.eigvalsh(self.Q)) < -1e-12 * max(
					1.0, np.max(np.abs(self.Q))):
				raise ValueError("Q must be positive semidefinite")

	@property
	def window(self):
		"""The number of time samples N in y_tilde."""
		return len(self.y_tilde) // len(self.S)

	def weight_root(self):
		"""Symmetric square root of Q, or None for the identity."""
		if self.Q is None:
			return None
		w, V = np.linalg.eigh(self.Q)
		return (V * np.sqrt(np.maximum(w, 0))).dot(V.T)

def lifted_output(model, S, x0, N, cfg):
	"""g(x0): the selected outputs at every step, time-major."""
	S = SensorSet(S, n_y=model.n_y)
	traj = integrator.simulate(model, x0, N, cfg)
	return traj.states.dot(model.measurement[list(S)].T).reshape(-1)

def _check_window(prob, N):
	if N != prob.window:
		raise DimensionError("y_tilde holds %d samples, N = %d" % (
			prob.window, N))

def lifted_residual(prob, x0, N, cfg):
	"""h(x0) = y_tilde - g(x0)."""
	_check_window(prob, N)
	return prob.y_tilde - lifted_output(prob.model, prob.S, x0, N, cfg)

def lifted_residual_jacobian(prob, x0, N, cfg):
	"""dh/dx0: the blocks -C_S xi_i stacked over i."""
	_check_window(prob, N)
	traj = integrator.simulate(prob.model, x0, N, cfg)
	stack = sensitivity.propagate_sensitivities(prob.model, traj, cfg)
	return -gramian.lifted_jacobian(prob.model.measurement, stack,
	                                prob.S)

class _SolverStop(Exception):
	def __init__(self, x, converged, message):
		super(_SolverStop, self).__init__(message)
		self.x = x
		self.converged = converged
		self.message = message

class _LiftedMap(object):
	# Shares one simulation between the residual and Jacobian calls
	# the solver makes at the same point.

	def __init__(self, prob, N, cfg):
		self.prob = prob
		self.N = N
		self.cfg = cfg
		self.root = prob.weight_root()
		self.key = None
		self.traj = None
		self.rows = prob.model.measurement[list(prob.S)]
		self.evaluations = 0
		self.objectives = []

	def _simulate(self, x):
		key = x.tobytes()
		if key != self.key:
			self.traj = integrator.simulate(self.prob.model, x, self.N,
			                                self.cfg)
			self.key = key
		return self.traj

	def _weighted(self, v):
		return v if self.root is None else self.root.dot(v)

	def residual(self, x):
		traj = self._simulate(x)
		h = self.prob.y_tilde - traj.states.dot(self.rows.T).reshape(-1)
		return self._weighted(h)

	def safe_residual(self, x):
		self.evaluations += 1
		try:
			return self.residual(x)
		except (NumericalError, ValueError) as e:
			# The solver shrinks its trust region on non-finite values.
			logger.debug("residual undefined at %r: %s", x, e)
			return np.full(len(self.prob.y_tilde), np.inf)

	def jacobian(self, x):
		traj = self._simulate(x)
		stack = sensitivity.propagate_sensitivities(
			self.prob.model, traj, self.cfg)
		J = -gramian.lifted_jacobian(self.prob.model.measurement,
		                             stack, self.prob.S)
		return self._weighted(J)

class _StoppingRule(object):
	"""Jacobian callback for the solver that also decides when to stop.

	The trust-region solver asks for a Jacobian only at the start and
	after each accepted step, so every call here is one iteration. The
	run stops as converged once the infinity norm of the projected
	gradient J^T h is at most gtol * max(1, objective). It stops as not
	converged when J has rank below n_x and the objective has dropped
	by less than a fraction stall_ratio over stall_iterations accepted
	steps.
	"""
	def __init__(self, lifted, gtol, stall_iterations=5, stall_ratio=1e-3):
		self.lifted = lifted
		self.gtol = gtol
		self.stall_iterations = stall_iterations
		self.stall_ratio = stall_ratio
		self.lower = lifted.prob.lower
		self.upper = lifted.prob.upper

	def projected_gradient(self, x, g):
		# The solver keeps iterates strictly inside the box, so a bound
		# counts as active within 1e-8 * max(1, |bound|).
		with np.errstate(invalid="ignore"):
			at_lower = x - self.lower <= 1e-8 * np.maximum(
				1.0, np.abs(self.lower))
			at_upper = self.upper - x <= 1e-8 * np.maximum(
				1.0, np.abs(self.upper))
		at_lower &= np.isfinite(self.lower)
		at_upper &= np.isfinite(self.upper)
		blocked = (at_lower & (g > 0)) | (at_upper & (g < 0))
		return np.where(blocked, 0.0, g)

	def __call__(self, x):
		lifted = self.lifted
		J = lifted.jacobian(x)
		h = lifted.residual(x)
		objective = float(h.dot(h))
		history = lifted.objectives
		history.append(objective)
		g = self.projected_gradient(x, J.T.dot(h))
		if np.max(np.abs(g)) <= self.gtol * max(1.0, objective):
			raise _SolverStop(x.copy(), True,
			                  "projected gradient below tolerance")
		k = self.stall_iterations
		if len(history) > k:
			before = history[-1 - k]
			if (before - objective <= self.stall_ratio * before and
			    np.linalg.matrix_rank(J) < len(x)):
				raise _SolverStop(
					x.copy(), False,
					"objective stalled on a rank-deficient jacobian")
		return J

class EstimationResult(object):
	"""Outcome of one estimate_initial_state call.

	'objective' is h^T Q h at x_hat. 'iterations' counts accepted solver
	steps, 'evaluations' counts residual evaluations and 'history' holds
	the objective at the start and after every accepted step.
	'jacobian_rank' below n_x means the selected sensors do not determine
	x0 locally. 'relative_error' is None unless the true state was given.
	"""
	def __init__(self, x_hat, objective, iterations, converged,
	             jacobian_rank, relative_error=None, message=None,
	             evaluations=None, history=()):
		self.x_hat = x_hat
		self.objective = objective
		self.iterations = iterations
		self.converged = converged
		self.jacobian_rank = jacobian_rank
		self.relative_error = relative_error
		self.message = message
		self.evaluations = evaluations
		self.history = list(history)

	def to_document(self):
		return {
			"x_hat": [float(v) for v in self.x_hat],
			"objective": self.objective,
			"iterations": self.iterations,
			"evaluations": self.evaluations,
			"converged": self.converged,
			"jacobian_rank": self.jacobian_rank,
			"relative_error": self.relative_error,
		}

	def __repr__(self):
		return "EstimationResult(converged=%r, objective=%.3g)" % (
			self.converged, self.objective)

def estimate_initial_state(prob, N, cfg, x_true=None, gtol=1e-10,
                           xtol=1e-12, ftol=1e-14, max_nfev=200,
                           stall_iterations=5):
	"""Bounded nonlinear least squares for x0 (trust-region reflective).

	gtol is relative: the run has converged once the projected gradient
	is below gtol * max(1, objective). A run that stops without meeting a
	tolerance, or that stalls with a rank-deficient Jacobian, is returned
	with converged=False rather than raised. Failures at the starting
	point are raised.
	"""
	_check_window(prob, N)
	lifted = _LiftedMap(prob, N, cfg)
	start = lifted.residual(prob.x0_guess)
	start_objective = float(start.dot(start))
	rule = _StoppingRule(lifted, gtol, stall_iterations=stall_iterations)

	try:
		solution = scipy.optimize.least_squares(
			lifted.safe_residual, prob.x0_guess, jac=rule,
			bounds=(prob.lower, prob.upper), method="trf", gtol=gtol,
			xtol=xtol, ftol=ftol, max_nfev=max_nfev)
	except _SolverStop as stop:
		x_hat, converged, message = stop.x, stop.converged, stop.message
	else:
		x_hat = solution.x
		converged = solution.status > 0
		message = solution.message

	x_hat = np.clip(x_hat, prob.lower, prob.upper)
	h = lifted.residual(x_hat)
	objective = float(h.dot(h))
	rank = int(np.linalg.matrix_rank(lifted.jacobian(x_hat)))
	if not converged:
		logger.warning("estimation stopped without converging: %s",
		               message)
	iterations = max(len(lifted.objectives) - 1, 0)
	logger.debug("estimate: objective %.3g -> %.3g in %d iterations, "
	             "%d evaluations", start_objective, objective, iterations,
	             lifted.evaluations)
	error = None
	if x_true is not None:
		error = relative_error(x_true, x_hat)
	return EstimationResult(x_hat, objective, iterations, converged, rank,
	                        relative_error=error, message=message,
	                        evaluations=lifted.evaluations,
	                        history=lifted.objectives)

def relative_error(x_true, x_hat):
	"""|x_true - x_hat|_2 / |x_true|_2."""
	x_true = np.asarray(x_true, dtype=float)
	x_hat = np.asarray(x_hat, dtype=float)
	if x_true.shape != x_hat.shape:
		raise DimensionError("states have shapes %r and %r" % (
			x_true.shape, x_hat.shape))
	scale = np.linalg.norm(x_true)
	if scale == 0:
		raise ValueError("relative error undefined for a zero state")
	return float(np.linalg.norm(x_true - x_hat) / scale)

def save_measurements(y_tilde, S, filename):
	"""One row per time sample; the header names the 1-based sensors."""
	S = SensorSet(S)
	rows = np.asarray(y_tilde, dtype=float).reshape((-1, len(S)))
	with open(filename, "w") as f:
		writer = csv.writer(f, lineterminator="\n")
		writer.writerow(S.one_based())
		for row in rows:
			writer.writerow([repr(float(v)) for v in row])

def load_measurements(filename):
	"""Returns (S, y_tilde) read from a measurements CSV file."""
	with open(filename) as f:
		reader = csv.reader(f)
		try:
			header = next(reader)
			S = SensorSet.from_one_based(int(v) for v in header)
		except (StopIteration, ValueError):
			raise DimensionError("%s: header must list sensor "
			                     "indices" % filename)
		rows = [[float(v) for v in row] for row in reader if row]
	if any(len(row) != len(S) for row in rows):
		raise DimensionError("%s: every row needs %d values" % (
			filename, len(S)))
	return S, np.array(rows).reshape(-1)

def _desk6():
	from obsgreedy import kinetics, networks
	return (kinetics.network_model(networks.DESK6),
	        networks.DESK6_X_TRUE)

class TestEstimation(unittest.TestCase):
	def test_residual_zero_at_truth(self):
		model, x_true = _desk6()
		cfg = integrator.IrkConfig(1e-3)
		S = [0, 2, 5]
		y = lifted_output(model, S, x_true, 20, cfg)
		self.assertEqual(len(y), 60)
		prob = EstimationProblem(model, S, y, x_true)
		np.testing.assert_array_equal(
			lifted_residual(prob, x_true, 20, cfg), np.zeros(60))

	def test_residual_zero_dynamics(self):
		model = core.zero_model(3)
		cfg = integrator.IrkConfig(0.1)
		x_star = np.array([1.0, 2.0, 3.0])
		x0 = np.array([0.5, 2.5, 3.0])
		y = lifted_output(model, range(3), x_star, 4, cfg)
		prob = EstimationProblem(model, range(3), y, x0)
		np.testing.assert_array_equal(lifted_residual(prob, x0, 4, cfg),
		                              np.tile(x_star - x0, 4))
		np.testing.assert_array_equal(
			lifted_residual_jacobian(prob, x0, 4, cfg),
			np.tile(-np.eye(3), (4, 1)))

	def test_residual_restacked(self):
		model, x_true = _desk6()
		cfg = integrator.IrkConfig(1e-3)
		S = [1, 3]
		y = lifted_output(model, S, x_true, 10, cfg)
		x0 = x_true * 1.05
		prob = EstimationProblem(model, S, y, x0)
		states = integrator.simulate(model, x0, 10, cfg).states
		expected = []
		for i in range(10):
			for j in S:
				expected.append(y[i * 2 + S.index(j)] - states[i][j])
		np.testing.assert_allclose(lifted_residual(prob, x0, 10, cfg),
		                           expected, rtol=0, atol=1e-15)

	def test_jacobian_scalar_linear(self):
		lam, T = -0.5, 0.1
		model = core.linear_model([[lam]])
		cfg = integrator.IrkConfig(T)
		prob = EstimationProblem(model, [0], np.zeros(5), [1.0])
		J = lifted_residual_jacobian(prob, [1.0], 5, cfg)
		R = integrator.stability_function(lam * T)
		np.testing.assert_allclose(J[:, 0], [-R ** i for i in range(5)],
		                           rtol=1e-12)

	def test_jacobian_against_fd(self):
		model, x_true = _desk6()
		cfg = integrator.IrkConfig(1e-3)
		S = [0, 4]
		y = lifted_output(model, S, x_true, 15, cfg)
		x0 = x_true * 0.97
		prob = EstimationProblem(model, S, y, x0)
		fd = core.central_difference(
			lambda z: lifted_residual(prob, z, 15, cfg), x0)
		self.assertLessEqual(core.max_relative_difference(
			lifted_residual_jacobian(prob, x0, 15, cfg), fd), 1e-5)

	def test_objective_gradient(self):
		model, x_true = _desk6()
		cfg = integrator.IrkConfig(1e-3)
		S = [2, 3]
		N = 8
		y = lifted_output(model, S, x_true, N, cfg)
		rng = np.random.default_rng(6)
		B = rng.normal(size=(2 * N, 2 * N))
		Q = B.dot(B.T) + np.eye(2 * N)
		x0 = x_true * rng.uniform(0.8, 1.2, size=6)
		prob = EstimationProblem(model, S, y, x0, Q=Q)

		def objective(z):
			h = lifted_residual(prob, z, N, cfg)
			return h.dot(Q).dot(h)

		h = lifted_residual(prob, x0, N, cfg)
		J = lifted_residual_jacobian(prob, x0, N, cfg)
		gradient = 2 * J.T.dot(Q).dot(h)
		fd = core.central_difference(objective, x0)
		np.testing.assert_allclose(gradient, fd, rtol=1e-4,
		                           atol=1e-4 * np.max(np.abs(fd)))
		root = prob.weight_root()
		np.testing.assert_allclose(root.dot(root), Q, rtol=1e-10,
		                           atol=1e-10 * np.max(np.abs(Q)))

	def test_full_sensing_recovery(self):
		model, x_true = _desk6()
		cfg = integrator.IrkConfig(1e-3)
		N = 30
		S = range(6)
		y = lifted_output(model, S, x_true, N, cfg)
		rng = np.random.default_rng(2)
		guess = x_true * (1 + rng.uniform(-0.1, 0.1, size=6))
		prob = EstimationProblem(model, S, y, guess)
		result = estimate_initial_state(prob, N, cfg, x_true=x_true)
		self.assertTrue(result.converged)
		self.assertLessEqual(result.relative_error, 1e-6)
		self.assertEqual(result.jacobian_rank, 6)
		self.assertGreaterEqual(result.objective, 0)
		self.assertTrue(np.all(result.x_hat >= 0))

	def test_zero_dynamics_closed_form(self):
		model = core.zero_model(2)
		cfg = integrator.IrkConfig(0.1)
		x_star = np.array([0.3, -1.2])
		y = lifted_output(model, [0, 1], x_star, 3, cfg)
		prob = EstimationProblem(model, [0, 1], y, [0.0, 0.0])
		result = estimate_initial_state(prob, 3, cfg)
		np.testing.assert_allclose(result.x_hat, x_star, atol=1e-12)

	def test_poorly_observed(self):
		model = core.linear_model([[-1.0, 0.0], [0.0, -2.0]])
		cfg = integrator.IrkConfig(0.1)
		x_true = np.array([1.0, 2.0])
		y = lifted_output(model, [0], x_true, 6, cfg)
		prob = EstimationProblem(model, [0], y, [1.1, 2.2])
		result = estimate_initial_state(prob, 6, cfg, x_true=x_true)
		self.assertTrue(result.converged)
		self.assertEqual(result.jacobian_rank, 1)
		self.assertGreater(result.relative_error, 0.01)
		self.assertAlmostEqual(result.x_hat[0], 1.0, delta=1e-8)

	def test_descent(self):
		model, x_true = _desk6()
		cfg = integrator.IrkConfig(1e-3)
		y = lifted_output(model, [0, 5], x_true, 20, cfg)
		guess = x_true * 1.08
		prob = EstimationProblem(model, [0, 5], y, guess)
		h = lifted_residual(prob, guess, 20, cfg)
		result = estimate_initial_state(prob, 20, cfg)
		self.assertLessEqual(result.objective, h.dot(h))
		history = np.array(result.history)
		self.assertEqual(len(history), result.iterations + 1)
		self.assertGreater(result.iterations, 0)
		self.assertAlmostEqual(history[0], h.dot(h), delta=1e-12 * h.dot(h))
		self.assertTrue(np.all(np.diff(history) <= 0), history)
		self.assertGreaterEqual(result.evaluations, len(history))
		self.assertEqual(result.to_document()["evaluations"],
		                 result.evaluations)

	def test_relative_gradient_stop(self):
		# h = 10 everywhere and J = -1, so |J^T h| = 40 and h^T h = 400.
		model = core.zero_model(1)
		cfg = integrator.IrkConfig(0.1)
		prob = EstimationProblem(model, [0], np.full(4, 10.0), [0.0])
		x = np.array([0.0])
		with self.assertRaises(_SolverStop) as cm:
			_StoppingRule(_LiftedMap(prob, 4, cfg), 0.2)(x)
		self.assertTrue(cm.exception.converged)
		J = _StoppingRule(_LiftedMap(prob, 4, cfg), 0.05)(x)
		np.testing.assert_array_equal(J, -np.ones((4, 1)))

	def test_projected_gradient(self):
		model = core.zero_model(2)
		prob = EstimationProblem(model, [0, 1], np.zeros(2), [0.0, 1.0],
		                         lower=[0.0, 0.0], upper=[5.0, 1.0])
		rule = _StoppingRule(
			_LiftedMap(prob, 1, integrator.IrkConfig(0.1)), 1e-10)
		x = np.array([0.0, 1.0])
		np.testing.assert_array_equal(
			rule.projected_gradient(x, np.array([3.0, -2.0])), [0.0, 0.0])
		np.testing.assert_array_equal(
			rule.projected_gradient(x, np.array([-3.0, 2.0])),
			[-3.0, 2.0])
		near = np.array([1e-9, 1.0 - 1e-9])
		np.testing.assert_array_equal(
			rule.projected_gradient(near, np.array([3.0, -2.0])),
			[0.0, 0.0])
		inside = np.array([0.5, 0.5])
		np.testing.assert_array_equal(
			rule.projected_gradient(inside, np.array([3.0, -2.0])),
			[3.0, -2.0])

	def test_stall_on_rank_deficient_jacobian(self):
		cfg = integrator.IrkConfig(0.1)
		x_true = np.array([1.0, 2.0])
		x = np.array([1.5, 2.0])
		for S, stops in (([0], True), ([0, 1], False)):
			model = core.linear_model([[-1.0, 0.0], [0.0, -2.0]])
			y = lifted_output(model, S, x_true, 6, cfg)
			prob = EstimationProblem(model, S, y, x)
			lifted = _LiftedMap(prob, 6, cfg)
			h = lifted.residual(x)
			lifted.objectives = [h.dot(h)] * 5
			rule = _StoppingRule(lifted, 1e-10, stall_iterations=5)
			if stops:
				with self.assertRaises(_SolverStop) as cm:
					rule(x)
				self.assertFalse(cm.exception.converged)
				self.assertIn("rank-deficient", cm.exception.message)
			else:
				self.assertEqual(rule(x).shape, (6 * len(S), 2))
			self.assertEqual(len(lifted.objectives), 6)

	def test_tiny_step_stops_early(self):
		# T = 1e-12: the window barely moves and most of x0 is weakly
		# observed through three sensors.
		from obsgreedy import kinetics, networks
		model = kinetics.network_model(networks.H2O2_SURROGATE)
		x_true = networks.H2O2_X_TRUE
		cfg = integrator.IrkConfig(1e-12)
		S = [0, 3, 7]
		y = lifted_output(model, S, x_true, 50, cfg)
		prob = EstimationProblem(model, S, y, 1.05 * x_true)
		result = estimate_initial_state(prob, 50, cfg, x_true=x_true)
		self.assertLess(result.evaluations, 50)
		self.assertLessEqual(result.objective, result.history[0])
		self.assertTrue(np.all(np.diff(result.history) <= 0))

	def test_observable_sets_recover(self):
		# Every sensor set whose Gramian has full rank at the truth.
		model, x_true = _desk6()
		cfg = integrator.IrkConfig(1e-3)
		N = 40
		atoms = gramian.averaged_gramian_collection(
			model, None, [x_true], N, cfg)
		rng = np.random.default_rng(9)
		checked = 0
		for mask in range(1, 1 << 6):
			S = [j for j in range(6) if mask & (1 << j)]
			if not gramian.is_observable(atoms, S):
				continue
			checked += 1
			y = lifted_output(model, S, x_true, N, cfg)
			guess = x_true * (1 + rng.uniform(-0.1, 0.1, size=6))
			prob = EstimationProblem(model, S, y, guess)
			result = estimate_initial_state(
				prob, N, cfg, x_true=x_true, gtol=1e-14, xtol=1e-14,
				ftol=1e-15)
			self.assertLessEqual(result.relative_error, 1e-5,
			                     "sensors %r" % (S,))
		self.assertGreater(checked, 0)

	def test_relative_error(self):
		self.assertEqual(relative_error([1.0, 2.0], [1.0, 2.0]), 0.0)
		self.assertEqual(relative_error([3.0, 4.0], [0.0, 0.0]), 1.0)
		from obsgreedy import networks
		x = networks.H2O2_X_TRUE
		x_hat = x.copy()
		x_hat[0] += 0.01
		self.assertAlmostEqual(relative_error(x, x_hat),
		                       0.01 / np.linalg.norm(x), delta=1e-15)
		with self.assertRaises(ValueError):
			relative_error([0.0, 0.0], [1.0, 0.0])

	def test_problem_validation(self):
		model, x_true = _desk6()
		with self.assertRaises(ValueError):
			EstimationProblem(model, [0], np.zeros(4), -x_true)
		with self.assertRaises(DimensionError):
			EstimationProblem(model, [0, 1], np.zeros(5), x_true)
		with self.assertRaises(DimensionError):
			EstimationProblem(model, [0], np.zeros(4), x_true,
			                  Q=np.eye(3))
		prob = EstimationProblem(model, [0], np.zeros(4), x_true)
		np.testing.assert_array_equal(prob.lower, np.zeros(6))
		with self.assertRaises(DimensionError):
			lifted_residual(prob, x_true, 5, integrator.IrkConfig(1e-3))

	def test_measurements_file(self):
		directory = tempfile.mkdtemp()
		try:
			path = os.path.join(directory, "y.csv")
			y = np.array([0.1, 1.0 / 3.0, 2.0, 1e-17])
			save_measurements(y, [4, 0], path)
			with open(path) as f:
				self.assertEqual(f.readline().strip(), "1,5")
			S, loaded = load_measurements(path)
		finally:
			shutil.rmtree(directory)
		self.assertEqual(S, (0, 4))
		np.testing.assert_array_equal(loaded, y)

if __name__ == "__main__":
	unittest.main()

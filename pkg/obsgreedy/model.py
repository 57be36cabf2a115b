"""The dynamical network abstraction used by every other module.

A network has a state x of n_x real values, autonomous dynamics
dx/dt = f(x) and n_y candidate sensors. Sensor j measures c_j x, where c_j
is row j of the measurement matrix C. Sensor indices are 0-based inside
the library and 1-based in every file and in CLI output.
"""

from __future__ import absolute_import

import unittest

import numpy as np

class DimensionError(ValueError):
	"""An argument has the wrong shape or refers to a missing index."""

class NumericalError(ArithmeticError):
	"""A numerical computation failed or produced non-finite values."""

def _frozen(a):
	a = np.array(a, dtype=float)
	a.flags.writeable = False
	return a

def measurement_matrix(rows, n_x=None):
	"""Validate and freeze a measurement matrix C (n_y x n_x)."""
	C = _frozen(rows)
	if C.ndim != 2 or C.shape[0] < 1:
		raise DimensionError("measurement matrix must be 2-D with at "
		                     "least one row, got shape %r" % (C.shape,))
	if n_x is not None and C.shape[1] != n_x:
		raise DimensionError("measurement matrix has %d columns, "
		                     "expected %d" % (C.shape[1], n_x))
	if not np.all(np.isfinite(C)):
		raise DimensionError("measurement matrix is not finite")
	for j, row in enumerate(C):
		if not np.any(row):
			raise DimensionError("sensor %d measures nothing "
			                     "(all-zero row)" % (j + 1))
	return C

class SensorSet(tuple):
	"""An ordered set of 0-based sensor indices.

	Members are kept sorted and free of duplicates, so two sets with the
	same members compare and hash equal. The repr shows 1-based indices,
	matching files and CLI output.
	"""
	def __new__(cls, members=(), n_y=None):
		members = sorted(set(int(m) for m in members))
		if n_y is not None:
			for m in members:
				if not 0 <= m < n_y:
					raise DimensionError(
						"sensor index %d out of range "
						"1..%d" % (m + 1, n_y))
		return super(SensorSet, cls).__new__(cls, members)

	@classmethod
	def from_one_based(cls, indices, n_y=None):
		return cls([i - 1 for i in indices], n_y=n_y)

	@classmethod
	def from_gamma(cls, gamma):
		return cls(np.flatnonzero(np.asarray(gamma)))

	def one_based(self):
		return [m + 1 for m in self]

	def label(self):
		"""1-based indices joined by commas, e.g. "1,3"."""
		return ",".join(str(i) for i in self.one_based())

	def gamma(self, n_y):
		"""The binary selection vector over n_y sensors."""
		result = np.zeros(n_y, dtype=int)
		result[list(self)] = 1
		return result

	def union(self, other):
		return SensorSet(tuple(self) + tuple(other))

	def __repr__(self):
		return "SensorSet(%s)" % self.label()

class ModelSpec(object):
	"""Dynamics f, its Jacobian and the measurement matrix of a network.

	'dynamics' and 'jacobian' take a state vector and return f(x) and
	the dense n_x x n_x matrix df/dx respectively. If no Jacobian is
	given, central finite differences of the dynamics are used.
	'nonnegative' marks concentration-like states; it controls default
	estimation bounds and clamping of perturbed guesses.
	"""
	def __init__(self, dynamics, measurement, jacobian=None, name=None,
	             nonnegative=False):
		self.measurement = measurement_matrix(measurement)
		self.n_y, self.n_x = self.measurement.shape
		self.dynamics = dynamics
		self.has_analytic_jacobian = jacobian is not None
		if jacobian is None:
			jacobian = lambda x: fd_jacobian(self, x)
		self.jacobian = jacobian
		self.name = name or "model"
		self.nonnegative = nonnegative

	def __repr__(self):
		return "ModelSpec(%s, n_x=%d, n_y=%d)" % (
			self.name, self.n_x, self.n_y)

def as_state(model, x):
	"""Check that x is a finite state vector for the given model."""
	x = np.asarray(x, dtype=float)
	if x.shape != (model.n_x,):
		raise DimensionError("state has shape %r, expected (%d,)" % (
			x.shape, model.n_x))
	if not np.all(np.isfinite(x)):
		raise DimensionError("state is not finite: %r" % (x,))
	return x

def eval_dynamics(model, x):
	"""Returns f(x)."""
	x = as_state(model, x)
	result = np.asarray(model.dynamics(x), dtype=float)
	if result.shape != (model.n_x,):
		raise DimensionError("dynamics returned shape %r" % (
			result.shape,))
	return result

def eval_jacobian(model, x):
	"""Returns df/dx at x."""
	x = as_state(model, x)
	result = np.asarray(model.jacobian(x), dtype=float)
	if result.shape != (model.n_x, model.n_x):
		raise DimensionError("jacobian returned shape %r" % (
			result.shape,))
	return result

def default_steps(x, rel=1e-6):
	"""Finite-difference steps h_i = rel * max(1, |x_i|)."""
	return rel * np.maximum(1.0, np.abs(np.asarray(x, dtype=float)))

def central_difference(func, x, h=None):
	"""Central-difference derivative of func at x, one column per x_i.

	func maps a vector to an array of any shape; the result has that
	shape plus a trailing axis of length len(x).
	"""
	x = np.asarray(x, dtype=float)
	if h is None:
		h = default_steps(x)
	h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
	if np.any(h <= 0):
		raise ValueError("finite-difference step must be positive")
	columns = []
	for i in range(len(x)):
		e = np.zeros_like(x)
		e[i] = h[i]
		plus = np.asarray(func(x + e), dtype=float)
		minus = np.asarray(func(x - e), dtype=float)
		columns.append((plus - minus) / (2 * h[i]))
	return np.stack(columns, axis=-1)

def fd_jacobian(model, x, h=None):
	"""Central-difference Jacobian of the dynamics.

	A scalar h is used for every component; by default each component
	gets its own step 1e-6 * max(1, |x_i|).
	"""
	x = as_state(model, x)
	if h is not None and np.any(np.asarray(h) <= 0):
		raise ValueError("finite-difference step must be positive")
	return central_difference(lambda z: eval_dynamics(model, z), x, h)

def with_fd_jacobian(model):
	"""Copy of a model whose Jacobian is computed by finite differences."""
	return ModelSpec(model.dynamics, model.measurement, name=model.name,
	                 nonnegative=model.nonnegative)

def zero_model(n_x, measurement=None):
	"""Stationary dynamics f(x) = 0."""
	C = np.eye(n_x) if measurement is None else measurement
	return ModelSpec(lambda x: np.zeros(n_x), C,
	                 jacobian=lambda x: np.zeros((n_x, n_x)),
	                 name="zero")

def linear_model(A, measurement=None):
	"""Linear dynamics f(x) = A x."""
	A = _frozen(np.atleast_2d(A))
	n_x = A.shape[0]
	C = np.eye(n_x) if measurement is None else measurement
	return ModelSpec(lambda x: A.dot(x), C, jacobian=lambda x: A,
	                 name="linear")

def polynomial_model(coefficient, power, n_x=1, measurement=None):
	"""Componentwise f(x)_i = coefficient * x_i ** power."""
	a = float(coefficient)
	k = int(power)
	C = np.eye(n_x) if measurement is None else measurement
	return ModelSpec(lambda x: a * x ** k, C,
	                 jacobian=lambda x: np.diag(a * k * x ** (k - 1)),
	                 name="polynomial")

def max_relative_difference(a, b):
	"""Max-norm relative difference |a - b|_max / max(1e-300, |b|_max)."""
	a = np.asarray(a, dtype=float)
	b = np.asarray(b, dtype=float)
	return np.max(np.abs(a - b)) / max(1e-300, np.max(np.abs(b)))

class TestModel(unittest.TestCase):
	def test_zero_dynamics(self):
		model = zero_model(2)
		np.testing.assert_array_equal(eval_dynamics(model, [1, 2]),
		                              [0, 0])
		np.testing.assert_array_equal(eval_jacobian(model, [1, 2]),
		                              np.zeros((2, 2)))
		np.testing.assert_array_equal(fd_jacobian(model, [1, 2]),
		                              np.zeros((2, 2)))

	def test_linear(self):
		model = linear_model([[-1.0]])
		np.testing.assert_array_equal(eval_dynamics(model, [3]), [-3])
		A = [[0, 1], [-1, 0]]
		model = linear_model(A)
		np.testing.assert_array_equal(eval_jacobian(model, [5, -2]), A)

	def test_fd_square(self):
		model = polynomial_model(1.0, 2)
		J = fd_jacobian(model, [2.0], h=1e-6)
		self.assertAlmostEqual(J[0, 0], 4.0, delta=1e-6)

	def test_fd_agrees_with_analytic(self):
		rng = np.random.default_rng(7)
		model = polynomial_model(-0.5, 3, n_x=3)
		for _ in range(10):
			x = rng.uniform(0.1, 2.0, size=3)
			self.assertLessEqual(max_relative_difference(
				fd_jacobian(model, x), eval_jacobian(model, x)),
				1e-5)

	def test_fd_fallback(self):
		model = with_fd_jacobian(polynomial_model(2.0, 2, n_x=2))
		self.assertFalse(model.has_analytic_jacobian)
		np.testing.assert_allclose(eval_jacobian(model, [1.0, 3.0]),
		                           np.diag([4.0, 12.0]), rtol=1e-6)

	def test_dimension_mismatch(self):
		model = zero_model(2)
		with self.assertRaises(DimensionError):
			eval_dynamics(model, [1, 2, 3])
		with self.assertRaises(DimensionError):
			eval_dynamics(model, [np.nan, 0])
		with self.assertRaises(ValueError):
			fd_jacobian(model, [1, 2], h=0.0)

	def test_pure(self):
		model = polynomial_model(-1.0, 3, n_x=2)
		a = eval_dynamics(model, [0.3, 0.7])
		b = eval_dynamics(model, [0.3, 0.7])
		self.assertEqual(a.tobytes(), b.tobytes())

	def test_measurement_matrix(self):
		with self.assertRaises(DimensionError):
			measurement_matrix([[1, 0], [0, 0]])
		with self.assertRaises(DimensionError):
			measurement_matrix(np.zeros((0, 2)))

	def test_sensor_set(self):
		s = SensorSet([2, 0, 2])
		self.assertEqual(tuple(s), (0, 2))
		self.assertEqual(s.one_based(), [1, 3])
		self.assertEqual(s.label(), "1,3")
		self.assertEqual(SensorSet().label(), "")
		np.testing.assert_array_equal(s.gamma(4), [1, 0, 1, 0])
		self.assertEqual(SensorSet.from_gamma([0, 1, 1]), (1, 2))
		self.assertEqual(SensorSet.from_one_based([1, 3]), s)
		with self.assertRaises(DimensionError):
			SensorSet([3], n_y=3)

if __name__ == "__main__":
	unittest.main()

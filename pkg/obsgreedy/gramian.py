"""Per-sensor Gramian atoms and the set Gramians built from them.

For one presumed initial state the Gramian of a sensor set S is

  W(S) = sum_{j in S} G_j,   G_j = sum_{i=0}^{N-1} xi_i^T c_j^T c_j xi_i

so once the atoms G_j are known, every set query is a sum of small
matrices. A collection holds atoms for q presumed initial states.
"""

from __future__ import absolute_import

import logging
import os
import re
import shutil
import tempfile
import unittest

import numpy as np
from joblib import Parallel, delayed

from obsgreedy import integrator
from obsgreedy import sensitivity
from obsgreedy import model as core
from obsgreedy.model import DimensionError, NumericalError, SensorSet

logger = logging.getLogger(__name__)

ATOM_FILE_RE = re.compile(r"atoms_k(?P<guess>\d+)_s(?P<sensor>\d+)\.csv$")

ATOM_FILE_FORMAT = "atoms_k%d_s%d.csv"

class GuessFailure(NumericalError):
	"""The trajectory of one presumed initial state could not be built."""

	def __init__(self, index, reason):
		self.index = index
		self.reason = reason
		super(GuessFailure, self).__init__(
			"initial guess %d failed: %s" % (index + 1, reason))

class GramianAtoms(object):
	"""Atoms G_j^(k) for q guesses and n_y sensors.

	'atoms' is a q x n_y x n_x x n_x array. 'failed' lists the 0-based
	indices of guesses that were dropped while building the collection;
	they have no slice in 'atoms'.
	"""
	def __init__(self, atoms, N, failed=()):
		atoms = np.array(atoms, dtype=float)
		if atoms.ndim != 4 or atoms.shape[2] != atoms.shape[3]:
			raise DimensionError("atoms must be q x n_y x n_x x n_x, "
			                     "got shape %r" % (atoms.shape,))
		if not np.all(np.isfinite(atoms)):
			raise NumericalError("Gramian atoms are not finite")
		atoms.flags.writeable = False
		self.atoms = atoms
		self.N = int(N)
		self.failed = tuple(failed)
		self.q, self.n_y, self.n_x = atoms.shape[:3]
		# trace(W^(k)(V)) per guess, used to scale log-det regularization.
		self.full_traces = np.einsum("kjii->k", atoms)

	def single_guess(self, kappa):
		"""The collection restricted to guess kappa (0-based)."""
		return GramianAtoms(self.atoms[kappa:kappa + 1], self.N)

	def __repr__(self):
		return "GramianAtoms(q=%d, n_y=%d, n_x=%d, N=%d)" % (
			self.q, self.n_y, self.n_x, self.N)

def _sensitivity_rows(C, stack):
	"""c_j xi_i for every step i and sensor j, as N x n_y x n_x."""
	C = np.asarray(C, dtype=float)
	xis = np.asarray(stack.xis)
	if C.ndim != 2 or C.shape[1] != xis.shape[1]:
		raise DimensionError("measurement matrix of shape %r does not "
		                     "match n_x = %d" % (C.shape, xis.shape[1]))
	return np.einsum("jk,ikl->ijl", C, xis)

def build_atoms(C, stack):
	"""Atoms of one guess, as an n_y x n_x x n_x array."""
	rows = _sensitivity_rows(C, stack)
	atoms = np.einsum("ija,ijb->jab", rows, rows)
	return (atoms + atoms.transpose((0, 2, 1))) / 2

def assemble(atoms, kappa, S):
	"""The Gramian W^(kappa)(S); the empty set gives a zero matrix."""
	S = SensorSet(S, n_y=atoms.n_y)
	if not 0 <= kappa < atoms.q:
		raise DimensionError("guess index %d out of range 1..%d" % (
			kappa + 1, atoms.q))
	if not S:
		return np.zeros((atoms.n_x, atoms.n_x))
	W = np.sum(atoms.atoms[kappa][list(S)], axis=0)
	return (W + W.T) / 2

def lifted_jacobian(C, stack, S=None):
	"""The stacked N*|S| x n_x matrix of blocks C_S xi_i, time-major."""
	rows = _sensitivity_rows(C, stack)
	if S is not None:
		rows = rows[:, list(SensorSet(S, n_y=rows.shape[1])), :]
	return rows.reshape((-1, rows.shape[2]))

def gramian_rank(W, rtol=1e-10):
	"""Number of eigenvalues above rtol times the largest one."""
	eigs = np.linalg.eigvalsh(np.asarray(W, dtype=float))
	top = np.max(eigs) if len(eigs) else 0.0
	if top <= 0:
		return 0
	return int(np.sum(eigs > rtol * top))

def is_observable(atoms, S, rtol=1e-10):
	"""True if W^(k)(S) has full rank for every guess k."""
	return all(gramian_rank(assemble(atoms, k, S), rtol) == atoms.n_x
	           for k in range(atoms.q))

def _guess_atoms(model, C, x0, N, cfg):
	try:
		traj = integrator.simulate(model, x0, N, cfg)
		stack = sensitivity.propagate_sensitivities(model, traj, cfg)
	except (NumericalError, ValueError) as e:
		return None, str(e)
	return build_atoms(C, stack), None

def averaged_gramian_collection(model, C, guesses, N, cfg, n_jobs=1,
                                skip_failed=False):
	"""Atoms for every guess in 'guesses'.

	Guesses run in parallel when n_jobs != 1; the result does not
	depend on n_jobs. A guess whose trajectory cannot be simulated
	raises GuessFailure, unless skip_failed is set, in which case it is
	logged and left out (its index is kept in the 'failed' attribute).
	"""
	if C is None:
		C = model.measurement
	C = core.measurement_matrix(C, n_x=model.n_x)
	guesses = [core.as_state(model, x) for x in guesses]
	if not guesses:
		raise DimensionError("at least one initial guess is needed")

	results = Parallel(n_jobs=n_jobs)(
		delayed(_guess_atoms)(model, C, x0, N, cfg) for x0 in guesses)

	atoms, failed = [], []
	for index, (guess_atoms, reason) in enumerate(results):
		if guess_atoms is not None:
			atoms.append(guess_atoms)
			continue
		if not skip_failed:
			raise GuessFailure(index, reason)
		logger.warning("dropping initial guess %d: %s", index + 1,
		               reason)
		failed.append(index)
	if not atoms:
		raise GuessFailure(failed[-1], "every initial guess failed")
	logger.debug("built atoms for %d of %d guesses", len(atoms),
	             len(guesses))
	return GramianAtoms(atoms, N, failed=failed)

def export_atoms(atoms, directory):
	"""Write every atom as its own CSV file, 17 significant digits."""
	if not os.path.isdir(directory):
		os.makedirs(directory)
	for kappa in range(atoms.q):
		for j in range(atoms.n_y):
			path = os.path.join(directory,
			                    ATOM_FILE_FORMAT % (kappa + 1, j + 1))
			np.savetxt(path, atoms.atoms[kappa, j], fmt="%.17g",
			           delimiter=",", header="N=%d" % atoms.N)

def import_atoms(directory):
	"""Read a collection written by export_atoms."""
	found = {}
	for name in os.listdir(directory):
		m = ATOM_FILE_RE.match(name)
		if m:
			key = (int(m.group("guess")), int(m.group("sensor")))
			found[key] = os.path.join(directory, name)
	if not found:
		raise DimensionError("no atom files in %r" % directory)
	q = max(k for k, _ in found)
	n_y = max(j for _, j in found)
	if len(found) != q * n_y:
		raise DimensionError("atom files in %r do not cover %d guesses "
		                     "x %d sensors" % (directory, q, n_y))
	N = None
	rows = []
	for kappa in range(1, q + 1):
		row = []
		for j in range(1, n_y + 1):
			path = found[(kappa, j)]
			with open(path) as f:
				header = f.readline()
			m = re.match(r"#\s*N=(\d+)", header)
			if m:
				N = int(m.group(1))
			row.append(np.atleast_2d(np.loadtxt(path, delimiter=",")))
		rows.append(row)
	return GramianAtoms(rows, N or 0)

def _random_stack(rng, N, n_x):
	return sensitivity.SensitivityStack(rng.normal(size=(N, n_x, n_x)))

class _Blowup(object):
	# Dynamics that refuse to evaluate far from the origin.
	def __call__(self, x):
		if abs(x[0]) > 5:
			raise ArithmeticError("state left the valid region")
		return -x

class TestGramian(unittest.TestCase):
	def test_identity_sensitivities(self):
		N = 4
		stack = sensitivity.SensitivityStack([np.eye(2)] * N)
		C = np.array([[1.0, 2.0], [0.0, 1.0]])
		atoms = build_atoms(C, stack)
		for j in range(2):
			np.testing.assert_allclose(
				atoms[j], N * np.outer(C[j], C[j]), rtol=1e-15)

	def test_single_step_unit_sensors(self):
		stack = sensitivity.SensitivityStack([np.eye(3)])
		atoms = build_atoms(np.eye(3), stack)
		for j in range(3):
			e = np.zeros(3)
			e[j] = 1
			np.testing.assert_array_equal(atoms[j], np.outer(e, e))

	def test_sum_equals_lifted_product(self):
		rng = np.random.default_rng(3)
		for _ in range(5):
			stack = _random_stack(rng, 7, 4)
			C = rng.normal(size=(5, 4))
			J = lifted_jacobian(C, stack)
			self.assertEqual(J.shape, (35, 4))
			total = np.sum(build_atoms(C, stack), axis=0)
			expected = J.T.dot(J)
			np.testing.assert_allclose(
				total, expected, rtol=0,
				atol=1e-10 * np.max(np.abs(expected)))

	def test_symmetric_psd(self):
		rng = np.random.default_rng(4)
		atoms = build_atoms(rng.normal(size=(3, 5)),
		                    _random_stack(rng, 6, 5))
		for G in atoms:
			np.testing.assert_array_equal(G, G.T)
			self.assertGreaterEqual(np.min(np.linalg.eigvalsh(G)),
			                        -1e-10 * np.linalg.norm(G))

	def test_assemble(self):
		rng = np.random.default_rng(5)
		raw = build_atoms(rng.normal(size=(6, 3)),
		                  _random_stack(rng, 5, 3))
		atoms = GramianAtoms([raw], 5)
		np.testing.assert_array_equal(assemble(atoms, 0, []),
		                              np.zeros((3, 3)))
		np.testing.assert_array_equal(assemble(atoms, 0, [2]), raw[2])
		A, B = [0, 3], [1, 4, 5]
		np.testing.assert_allclose(
			assemble(atoms, 0, A + B),
			assemble(atoms, 0, A) + assemble(atoms, 0, B),
			rtol=0, atol=1e-12 * np.trace(assemble(atoms, 0, A + B)))
		full = assemble(atoms, 0, range(6))
		diff = full - assemble(atoms, 0, A)
		self.assertGreaterEqual(np.min(np.linalg.eigvalsh(diff)),
		                        -1e-10 * np.trace(full))
		with self.assertRaises(DimensionError):
			assemble(atoms, 0, [6])

	def test_full_sensing_matches_lifted(self):
		from obsgreedy import kinetics, networks
		m = kinetics.network_model(networks.DESK6)
		cfg = integrator.IrkConfig(1e-3)
		traj = integrator.simulate(m, networks.DESK6_X_TRUE, 15, cfg)
		stack = sensitivity.propagate_sensitivities(m, traj, cfg)
		atoms = GramianAtoms([build_atoms(m.measurement, stack)], 15)
		J = lifted_jacobian(m.measurement, stack)
		W = assemble(atoms, 0, range(m.n_y))
		np.testing.assert_allclose(W, J.T.dot(J), rtol=0,
		                           atol=1e-10 * np.max(np.abs(W)))
		self.assertTrue(is_observable(atoms, range(m.n_y)))
		self.assertEqual(np.linalg.matrix_rank(J), m.n_x)

	def test_collection(self):
		from obsgreedy import kinetics, networks
		m = kinetics.network_model(networks.DESK6)
		cfg = integrator.IrkConfig(1e-3)
		x = networks.DESK6_X_TRUE
		rng = np.random.default_rng(8)
		guesses = [x + rng.uniform(0, 0.5, size=6) for _ in range(3)]
		atoms = averaged_gramian_collection(m, None, guesses, 10, cfg)
		self.assertEqual((atoms.q, atoms.n_y, atoms.n_x), (3, 6, 6))
		for kappa, guess in enumerate(guesses):
			single = averaged_gramian_collection(m, None, [guess], 10,
			                                     cfg)
			self.assertEqual(single.q, 1)
			np.testing.assert_array_equal(atoms.atoms[kappa],
			                              single.atoms[0])
		twice = averaged_gramian_collection(m, None, [x, x], 10, cfg)
		self.assertEqual(twice.atoms[0].tobytes(),
		                 twice.atoms[1].tobytes())

	def test_single_sensor_unobservable(self):
		m = core.linear_model([[-1.0, 0.0], [0.0, -2.0]])
		cfg = integrator.IrkConfig(0.1)
		atoms = averaged_gramian_collection(m, None, [[1.0, 1.0]], 5,
		                                    cfg)
		self.assertFalse(is_observable(atoms, [0]))
		self.assertTrue(is_observable(atoms, [0, 1]))
		self.assertEqual(gramian_rank(assemble(atoms, 0, [0])), 1)
		self.assertEqual(gramian_rank(np.zeros((2, 2))), 0)

	def test_failed_guess(self):
		m = core.ModelSpec(_Blowup(), np.eye(1),
		                   jacobian=lambda x: -np.eye(1))
		cfg = integrator.IrkConfig(0.1)
		with self.assertRaises(GuessFailure) as cm:
			averaged_gramian_collection(m, None, [[1.0], [10.0]], 3,
			                            cfg)
		self.assertEqual(cm.exception.index, 1)
		atoms = averaged_gramian_collection(m, None, [[1.0], [10.0]], 3,
		                                    cfg, skip_failed=True)
		self.assertEqual(atoms.q, 1)
		self.assertEqual(atoms.failed, (1,))

	def test_export_import(self):
		rng = np.random.default_rng(9)
		raw = [build_atoms(rng.normal(size=(2, 3)),
		                   _random_stack(rng, 4, 3)) for _ in range(2)]
		atoms = GramianAtoms(raw, 4)
		directory = tempfile.mkdtemp()
		try:
			export_atoms(atoms, directory)
			self.assertTrue(os.path.exists(
				os.path.join(directory, "atoms_k2_s1.csv")))
			loaded = import_atoms(directory)
		finally:
			shutil.rmtree(directory)
		self.assertEqual(loaded.N, 4)
		np.testing.assert_array_equal(loaded.atoms, atoms.atoms)

if __name__ == "__main__":
	unittest.main()

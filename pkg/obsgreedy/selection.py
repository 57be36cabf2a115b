"""Observability set functions and sensor selection.

The objective of a sensor set S averages a scalar measure of the
per-guess Gramians over the q presumed initial states:

  O(S) = (1/q) sum_k L(W^(k)(S))

with L the trace (a modular function of S) or the regularized log
determinant (submodular and monotone). Sets are chosen greedily, by
exhaustive search or at random.
"""

from __future__ import absolute_import

import itertools
import json
import logging
import unittest

import numpy as np
import scipy.special
from joblib import Parallel, delayed

from obsgreedy import gramian
from obsgreedy.model import DimensionError, NumericalError, SensorSet

logger = logging.getLogger(__name__)

TRACE = "trace"
LOGDET = "logdet"
METRIC_KINDS = (TRACE, LOGDET)

# Largest number of subsets exhaustive_select will enumerate.
EXHAUSTIVE_LIMIT = 10 ** 6

class CapacityError(ValueError):
	"""A search would enumerate more sets than allowed."""

class Metric(object):
	"""The scalar measure L applied to each guess's Gramian.

	For "logdet" the Gramian is shifted by eps * I before taking the
	determinant, where eps = logdet_epsilon * max(1, trace(W(V)) / n_x)
	is relative to the size of the full-set Gramian of that guess.
	"""
	def __init__(self, kind, logdet_epsilon=1e-10):
		if kind not in METRIC_KINDS:
			raise ValueError("unknown metric %r (expected one of %s)" % (
				kind, ", ".join(METRIC_KINDS)))
		if not logdet_epsilon >= 0:
			raise ValueError("logdet_epsilon must be nonnegative")
		self.kind = kind
		self.logdet_epsilon = float(logdet_epsilon)

	@classmethod
	def parse(cls, text, logdet_epsilon=1e-10):
		return cls(text.strip().lower(), logdet_epsilon=logdet_epsilon)

	def __eq__(self, other):
		return (isinstance(other, Metric) and self.kind == other.kind
		        and self.logdet_epsilon == other.logdet_epsilon)

	def __ne__(self, other):
		return not self == other

	def __hash__(self):
		return hash((self.kind, self.logdet_epsilon))

	def __repr__(self):
		if self.kind == LOGDET:
			return "Metric(logdet, epsilon=%g)" % self.logdet_epsilon
		return "Metric(%s)" % self.kind

def _guess_value(atoms, kappa, S, m):
	W = gramian.assemble(atoms, kappa, S)
	if m.kind == TRACE:
		value = np.trace(W)
	else:
		scale = max(1.0, atoms.full_traces[kappa] / atoms.n_x)
		shifted = W + m.logdet_epsilon * scale * np.eye(atoms.n_x)
		sign, value = np.linalg.slogdet(shifted)
		if sign <= 0:
			raise NumericalError(
				"Gramian of %r for guess %d is singular; use a "
				"positive logdet_epsilon" % (S, kappa + 1))
	if not np.isfinite(value):
		raise NumericalError("metric value is not finite")
	return float(value)

def metric_eval(atoms, S, m):
	"""O(S): the metric averaged over every guess in the collection."""
	S = SensorSet(S, n_y=atoms.n_y)
	return float(np.mean([_guess_value(atoms, k, S, m)
	                      for k in range(atoms.q)]))

def marginal_gains(atoms, S, m, candidates=None, n_jobs=1):
	"""O(S + {a}) - O(S) for each candidate a not in S.

	Returns (candidates, gains) with candidates in ascending order.
	"""
	S = SensorSet(S, n_y=atoms.n_y)
	if candidates is None:
		candidates = [a for a in range(atoms.n_y) if a not in S]
	candidates = sorted(candidates)
	base = metric_eval(atoms, S, m)
	values = Parallel(n_jobs=n_jobs)(
		delayed(metric_eval)(atoms, S.union([a]), m)
		for a in candidates)
	return candidates, np.array(values) - base

class SelectionResult(object):
	"""A chosen sensor set and how it was found.

	'gains' holds (step, sensor, gain) triples for greedy runs, with
	1-based steps and 0-based sensors.
	"""
	def __init__(self, chosen, objective, method, metric=None,
	             gains=(), seed=None, empty_value=None):
		self.chosen = SensorSet(chosen)
		self.objective = objective
		self.method = method
		self.metric = metric
		self.gains = list(gains)
		self.seed = seed
		self.empty_value = empty_value

	@property
	def r(self):
		return len(self.chosen)

	def to_document(self):
		"""A JSON-ready dict; sensor indices are 1-based."""
		doc = {
			"method": self.method,
			"chosen": self.chosen.one_based(),
			"objective": self.objective,
			"gains": [{"step": step, "sensor": a + 1, "gain": g}
			          for step, a, g in self.gains],
			"seed": self.seed,
		}
		if self.metric is not None:
			doc["metric"] = self.metric.kind
			doc["logdet_epsilon"] = self.metric.logdet_epsilon
		return doc

	def __repr__(self):
		return "SelectionResult(%s, %r, objective=%r)" % (
			self.method, self.chosen, self.objective)

def _check_r(r, n_y):
	if not 1 <= r <= n_y:
		raise DimensionError("selection size r = %d out of range "
		                     "1..%d" % (r, n_y))

def greedy_select(atoms, r, m, n_jobs=1):
	"""Add the sensor with the largest marginal gain, r times.

	Ties go to the lowest sensor index.
	"""
	_check_r(r, atoms.n_y)
	S = SensorSet()
	empty = metric_eval(atoms, S, m)
	gains = []
	for step in range(1, r + 1):
		candidates, values = marginal_gains(atoms, S, m, n_jobs=n_jobs)
		best = int(np.argmax(values))
		a = candidates[best]
		S = S.union([a])
		gains.append((step, a, float(values[best])))
		logger.debug("greedy step %d: sensor %d, gain %.6g", step,
		             a + 1, values[best])
	return SelectionResult(S, metric_eval(atoms, S, m), "greedy",
	                       metric=m, gains=gains, empty_value=empty)

def exhaustive_select(atoms, r, m, limit=EXHAUSTIVE_LIMIT):
	"""The best r-set, lexicographically smallest among equal values."""
	_check_r(r, atoms.n_y)
	count = scipy.special.comb(atoms.n_y, r, exact=True)
	if count > limit:
		raise CapacityError("%d subsets of size %d from %d sensors "
		                    "exceed the limit of %d" % (
			count, r, atoms.n_y, limit))
	best, best_value = None, None
	for S in itertools.combinations(range(atoms.n_y), r):
		value = metric_eval(atoms, S, m)
		if best is None or value > best_value:
			best, best_value = S, value
	return SelectionResult(best, best_value, "exhaustive", metric=m,
	                       empty_value=metric_eval(atoms, (), m))

def random_select(n_y, r, seed, atoms=None, metric=None):
	"""A uniformly random r-set; the objective is filled in if atoms
	and metric are given."""
	_check_r(r, n_y)
	rng = np.random.default_rng(seed)
	chosen = SensorSet(rng.choice(n_y, size=r, replace=False))
	objective = None
	if atoms is not None and metric is not None:
		objective = metric_eval(atoms, chosen, metric)
	return SelectionResult(chosen, objective, "random", metric=metric,
	                       seed=seed)

class BoundReport(object):
	"""Greedy versus optimum: (O* - O(S)) / (O* - O(empty)).

	'ratio' is None when O* equals O(empty); the bound then holds
	trivially.
	"""
	def __init__(self, ratio, bound, satisfied, gap):
		self.ratio = ratio
		self.bound = bound
		self.satisfied = satisfied
		self.gap = gap

	def __repr__(self):
		return "BoundReport(ratio=%r, bound=%r, satisfied=%r)" % (
			self.ratio, self.bound, self.satisfied)

def greedy_bound_check(greedy, opt, empty_val, tolerance=1e-9):
	r = greedy.r
	bound = ((r - 1.0) / r) ** r
	gap = opt.objective - greedy.objective
	spread = opt.objective - empty_val
	if spread <= tolerance * max(1.0, abs(opt.objective)):
		return BoundReport(None, bound, True, gap)
	ratio = gap / spread
	return BoundReport(ratio, bound, ratio <= bound + tolerance, gap)

def _diagonal_atoms(weights):
	n = len(weights)
	raw = np.zeros((1, n, n, n))
	for j, w in enumerate(weights):
		raw[0, j, j, j] = w
	return gramian.GramianAtoms(raw, 1)

def _random_atoms(rng, q, n_y, n_x, rank=2):
	B = rng.normal(size=(q, n_y, n_x, rank))
	return gramian.GramianAtoms(np.einsum("kjar,kjbr->kjab", B, B), 1)

def _subset_values(atoms, m):
	# Metric value of every subset, keyed by bitmask.
	values = {}
	for mask in range(1 << atoms.n_y):
		S = [j for j in range(atoms.n_y) if mask & (1 << j)]
		values[mask] = metric_eval(atoms, S, m)
	return values

class TestSelection(unittest.TestCase):
	def test_trace_basics(self):
		atoms = _diagonal_atoms([3.0, 1.0, 2.0])
		m = Metric(TRACE)
		self.assertEqual(metric_eval(atoms, [], m), 0.0)
		self.assertEqual(metric_eval(atoms, [0, 2], m), 5.0)

	def test_trace_identity_sensitivities(self):
		N = 7
		from obsgreedy import sensitivity
		stack = sensitivity.SensitivityStack([np.eye(3)] * N)
		atoms = gramian.GramianAtoms(
			[gramian.build_atoms(np.eye(3), stack)], N)
		self.assertEqual(metric_eval(atoms, [1], Metric(TRACE)), N)

	def test_logdet_identity(self):
		atoms = gramian.GramianAtoms(np.zeros((1, 2, 3, 3)), 1)
		m = Metric(LOGDET, logdet_epsilon=1.0)
		self.assertEqual(metric_eval(atoms, [], m), 0.0)

	def test_logdet_against_eigenvalues(self):
		rng = np.random.default_rng(12)
		atoms = _random_atoms(rng, 2, 5, 4)
		m = Metric(LOGDET, logdet_epsilon=1e-3)
		S = [0, 3]
		expected = []
		for k in range(2):
			W = gramian.assemble(atoms, k, S)
			eps = 1e-3 * max(1.0, atoms.full_traces[k] / 4)
			expected.append(np.sum(np.log(
				np.linalg.eigvalsh(W) + eps)))
		self.assertAlmostEqual(metric_eval(atoms, S, m),
		                       np.mean(expected), delta=1e-10)

	def test_singular_logdet(self):
		atoms = gramian.GramianAtoms(np.zeros((1, 2, 2, 2)), 1)
		with self.assertRaises(NumericalError):
			metric_eval(atoms, [0], Metric(LOGDET, logdet_epsilon=0))
		with self.assertRaises(NumericalError):
			gramian.GramianAtoms(np.full((1, 1, 1, 1), np.inf), 1)

	def test_greedy_modular(self):
		atoms = _diagonal_atoms([3.0, 1.0, 2.0])
		result = greedy_select(atoms, 2, Metric(TRACE))
		self.assertEqual(result.chosen.one_based(), [1, 3])
		self.assertEqual([g for _, _, g in result.gains], [3.0, 2.0])
		self.assertEqual(result.objective, 5.0)
		opt = exhaustive_select(atoms, 2, Metric(TRACE))
		self.assertEqual(opt.chosen.one_based(), [1, 3])
		self.assertEqual(opt.objective, 5.0)

	def test_full_selection(self):
		rng = np.random.default_rng(2)
		atoms = _random_atoms(rng, 2, 4, 3)
		for kind in METRIC_KINDS:
			m = Metric(kind, logdet_epsilon=1e-4)
			self.assertEqual(greedy_select(atoms, 4, m).chosen,
			                 (0, 1, 2, 3))
			self.assertEqual(exhaustive_select(atoms, 4, m).chosen,
			                 (0, 1, 2, 3))
		with self.assertRaises(DimensionError):
			greedy_select(atoms, 0, Metric(TRACE))
		with self.assertRaises(DimensionError):
			greedy_select(atoms, 5, Metric(TRACE))

	def test_greedy_ties_lowest_index(self):
		atoms = _diagonal_atoms([1.0, 2.0, 2.0, 2.0])
		result = greedy_select(atoms, 2, Metric(TRACE))
		self.assertEqual(result.chosen, (1, 2))
		opt = exhaustive_select(atoms, 2, Metric(TRACE))
		self.assertEqual(opt.chosen, (1, 2))

	def test_greedy_parallel_matches(self):
		rng = np.random.default_rng(21)
		atoms = _random_atoms(rng, 3, 6, 4)
		m = Metric(LOGDET, logdet_epsilon=1e-4)
		a = greedy_select(atoms, 3, m)
		b = greedy_select(atoms, 3, m, n_jobs=2)
		self.assertEqual(a.chosen, b.chosen)
		self.assertEqual(a.gains, b.gains)

	def test_trace_modular(self):
		rng = np.random.default_rng(5)
		atoms = _random_atoms(rng, 2, 8, 3)
		m = Metric(TRACE)
		singles = [metric_eval(atoms, [j], m) for j in range(8)]
		for mask, value in _subset_values(atoms, m).items():
			expected = sum(singles[j] for j in range(8)
			               if mask & (1 << j))
			self.assertAlmostEqual(value, expected,
			                       delta=1e-10 * max(1.0, expected))

	def test_logdet_submodular_monotone(self):
		for seed in range(20):
			rng = np.random.default_rng(100 + seed)
			atoms = _random_atoms(rng, 2, 6, 4, rank=1)
			values = _subset_values(atoms, Metric(LOGDET, 1e-4))
			full = (1 << 6) - 1
			for B in range(1 << 6):
				A = B
				while True:
					# A runs over every subset of B.
					self.assertGreaterEqual(
						values[B], values[A] - 1e-9)
					for s in range(6):
						bit = 1 << s
						if B & bit:
							continue
						gain_a = values[A | bit] - values[A]
						gain_b = values[B | bit] - values[B]
						self.assertGreaterEqual(
							gain_a, gain_b
							- 1e-9 * max(1.0, abs(gain_a)))
					if A == 0:
						break
					A = (A - 1) & B
			self.assertGreaterEqual(values[full], values[0])

	def test_greedy_trace_is_optimal(self):
		rng = np.random.default_rng(31)
		for _ in range(100):
			atoms = _random_atoms(rng, 2, 8, 3)
			r = int(rng.integers(1, 9))
			greedy = greedy_select(atoms, r, Metric(TRACE))
			opt = exhaustive_select(atoms, r, Metric(TRACE))
			self.assertEqual(greedy.chosen, opt.chosen)

	def test_greedy_logdet_bound(self):
		rng = np.random.default_rng(41)
		m = Metric(LOGDET, logdet_epsilon=1e-4)
		for _ in range(100):
			atoms = _random_atoms(rng, 2, 8, 4, rank=1)
			for r in (2, 3, 4):
				greedy = greedy_select(atoms, r, m)
				opt = exhaustive_select(atoms, r, m)
				report = greedy_bound_check(greedy, opt,
				                            greedy.empty_value)
				self.assertTrue(report.satisfied, report)
				self.assertGreaterEqual(report.gap, -1e-9)

	def test_bound_trivial_cases(self):
		rng = np.random.default_rng(1)
		atoms = _random_atoms(rng, 1, 5, 3)
		m = Metric(LOGDET, logdet_epsilon=1e-4)
		opt = exhaustive_select(atoms, 2, m)
		report = greedy_bound_check(opt, opt, opt.empty_value)
		self.assertEqual(report.ratio, 0.0)
		self.assertTrue(report.satisfied)
		greedy = greedy_select(atoms, 1, m)
		report = greedy_bound_check(
			greedy, exhaustive_select(atoms, 1, m), greedy.empty_value)
		self.assertEqual(report.bound, 0.0)
		self.assertTrue(report.satisfied)
		zero = gramian.GramianAtoms(np.zeros((1, 3, 2, 2)), 1)
		flat = exhaustive_select(zero, 2, Metric(TRACE))
		report = greedy_bound_check(flat, flat, 0.0)
		self.assertIsNone(report.ratio)
		self.assertTrue(report.satisfied)

	def test_bound_desk6(self):
		from obsgreedy import integrator, kinetics, networks
		net = networks.DESK6
		model = kinetics.network_model(net)
		cfg = integrator.IrkConfig(1e-3)
		x = networks.DESK6_X_TRUE
		atoms = gramian.averaged_gramian_collection(
			model, None, [x, x + 0.2], 30, cfg)
		m = Metric(LOGDET)
		greedy = greedy_select(atoms, 3, m)
		opt = exhaustive_select(atoms, 3, m)
		empty = greedy.empty_value
		self.assertGreaterEqual(
			greedy.objective,
			(1 - 1 / np.e) * (opt.objective - empty) + empty)

	def test_exhaustive_capacity(self):
		atoms = gramian.GramianAtoms(np.ones((1, 40, 1, 1)), 1)
		with self.assertRaises(CapacityError):
			exhaustive_select(atoms, 20, Metric(TRACE))

	def test_averaged_is_mean(self):
		rng = np.random.default_rng(17)
		atoms = _random_atoms(rng, 4, 5, 3)
		for kind in METRIC_KINDS:
			m = Metric(kind, logdet_epsilon=1e-4)
			for S in ([0], [1, 2], [0, 2, 3, 4]):
				singles = [metric_eval(atoms.single_guess(k), S, m)
				           for k in range(atoms.q)]
				self.assertAlmostEqual(metric_eval(atoms, S, m),
				                       np.mean(singles), delta=1e-12
				                       * max(1.0, abs(np.mean(singles))))

	def test_single_guess_selection(self):
		# A q = 1 collection selects exactly as the atoms of that
		# guess's own sensitivity stack do, and a one-guess slice of a
		# larger collection agrees with both.
		from obsgreedy import integrator, kinetics, networks, sensitivity
		model = kinetics.network_model(networks.DESK6)
		cfg = integrator.IrkConfig(1e-3)
		x0 = networks.DESK6_X_TRUE * 1.1
		collection = gramian.averaged_gramian_collection(
			model, None, [x0], 40, cfg)
		traj = integrator.simulate(model, x0, 40, cfg)
		stack = sensitivity.propagate_sensitivities(model, traj, cfg)
		direct = gramian.GramianAtoms(
			[gramian.build_atoms(model.measurement, stack)], 40)
		wider = gramian.averaged_gramian_collection(
			model, None, [x0 * 0.8, x0, x0 * 1.2], 40, cfg)
		self.assertEqual(collection.q, 1)
		for m in (Metric(TRACE), Metric(LOGDET, logdet_epsilon=1e-6)):
			for r in (1, 3, 5):
				expected = greedy_select(direct, r, m)
				for atoms in (collection, wider.single_guess(1)):
					result = greedy_select(atoms, r, m)
					self.assertEqual(result.chosen, expected.chosen,
					                 (m.kind, r))
					np.testing.assert_allclose(
						[g for _, _, g in result.gains],
						[g for _, _, g in expected.gains], rtol=1e-12)

	def test_random_select(self):
		a = random_select(6, 3, seed=4)
		b = random_select(6, 3, seed=4)
		self.assertEqual(a.chosen, b.chosen)
		self.assertEqual(len(a.chosen), 3)
		self.assertEqual(random_select(6, 6, seed=1).chosen,
		                 tuple(range(6)))
		counts = np.zeros(6)
		for seed in range(10000):
			counts[list(random_select(6, 3, seed).chosen)] += 1
		np.testing.assert_allclose(counts / 10000, 0.5, atol=0.02)

	def test_document(self):
		atoms = _diagonal_atoms([3.0, 1.0, 2.0])
		doc = greedy_select(atoms, 2, Metric(TRACE)).to_document()
		self.assertEqual(doc["chosen"], [1, 3])
		self.assertEqual(doc["gains"][1],
		                 {"step": 2, "sensor": 3, "gain": 2.0})
		self.assertEqual(doc["metric"], "trace")
		json.dumps(doc)

	def test_metric_parse(self):
		self.assertEqual(Metric.parse(" LogDet "), Metric(LOGDET))
		with self.assertRaises(ValueError):
			Metric.parse("rank")

if __name__ == "__main__":
	unittest.main()

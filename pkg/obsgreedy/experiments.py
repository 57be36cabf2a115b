"""Experiment files and the selection, gain and estimation experiments.

An experiment file names a network (a network file or a bundled network)
and the settings of the three experiments:

  Experiment File v1

  network = desk6
  T = 0.001
  N = 200
  q = 10
  p = 2.0
  metric = both

Every experiment is reproducible from the file and its seed; the results
are tables that are written out as CSV files.
"""

from __future__ import absolute_import

import csv
import logging
import os
import shutil
import tempfile
import time
import unittest

import numpy as np
from joblib import Parallel, delayed

from obsgreedy import estimation
from obsgreedy import fields
from obsgreedy import gramian
from obsgreedy import integrator
from obsgreedy import kinetics
from obsgreedy import netfile
from obsgreedy import networks
from obsgreedy import parser
from obsgreedy import selection
from obsgreedy.model import NumericalError, SensorSet

logger = logging.getLogger(__name__)

EXPERIMENT_HEADER = "Experiment File v1"

# An optimal selection may exceed the best random error by this much.
OPTIMALITY_TOLERANCE = 1e-9

class ExperimentConfig(fields.Record):
	"""Settings of one experiment, read from an experiment file.

	All settings are top-level "key = value" properties. 'r' may be
	left out, in which case selections are made for every r = 1..n_y.
	'x_true' defaults to the x0 of the network file or the reference
	state of a bundled network.
	"""
	SECTION_NAME = "Experiment"

	network = fields.Field("network", str, default="desk6")
	x_true = fields.Field("x_true", fields.reals)
	T = fields.Field("T", fields.real, default=1e-3)
	N = fields.Field("N", fields.integer, default=200)
	q = fields.Field("q", fields.integer, default=10)
	p = fields.Field("p", fields.real, default=2.0)
	r = fields.Field("r", fields.integer)
	sensor_fractions = fields.Field("sensor_fractions", fields.reals,
	                                default=(1 / 3.0, 0.5, 2 / 3.0))
	metric = fields.Field("metric", str, default="both")
	logdet_epsilon = fields.Field("logdet_epsilon", fields.real,
	                              default=1e-10)
	seed = fields.Field("seed", fields.integer, default=0)
	num_random_configs = fields.Field("num_random_configs",
	                                  fields.integer, default=200)
	output_dir = fields.Field("output_dir", str, default="results")
	newton_tol = fields.Field("newton_tol", fields.real, default=1e-12)
	newton_max_iters = fields.Field("newton_max_iters", fields.integer,
	                                default=50)
	guess_spread = fields.Field("guess_spread", fields.real, default=0.1)
	solver_tol = fields.Field("solver_tol", fields.real, default=1e-14)
	gradient_tol = fields.Field("gradient_tol", fields.real, default=1e-10)
	max_evaluations = fields.Field("max_evaluations", fields.integer,
	                               default=200)
	rerun_seeds = fields.Field("rerun_seeds", fields.integers,
	                           default=(1, 2, 3, 4))
	n_jobs = fields.Field("n_jobs", fields.integer, default=1)

	def __init__(self, *args, **kwargs):
		super(ExperimentConfig, self).__init__(*args, **kwargs)
		self.filename = "<string>"
		self.base_dir = ""
		# Line of each property in the file, for validation errors.
		self.lines = {}

	def properties(self):
		return [_ConfigProperty(self, f) for f in self.field_names()]

	def _fail(self, field, message):
		raise parser.ParseException(self.filename,
		                            self.lines.get(field, 1), message)

	def validate(self, model):
		"""Check the settings against the network they apply to."""
		if not self.T > 0:
			self._fail("T", "T must be positive")
		if self.N < 1:
			self._fail("N", "N must be at least 1")
		if self.q < 1:
			self._fail("q", "q must be at least 1")
		if not self.p >= 0:
			self._fail("p", "p must be nonnegative")
		if self.r is not None and not 1 <= self.r <= model.n_y:
			self._fail("r", "r must be in 1..%d" % model.n_y)
		if self.metric not in selection.METRIC_KINDS + ("both",):
			self._fail("metric", "metric must be trace, logdet or "
			           "both")
		if not self.logdet_epsilon >= 0:
			self._fail("logdet_epsilon", "logdet_epsilon must be "
			           "nonnegative")
		if not all(0 < f <= 1 for f in self.sensor_fractions):
			self._fail("sensor_fractions", "sensor fractions must be "
			           "in (0, 1]")
		if self.num_random_configs < 1:
			self._fail("num_random_configs", "num_random_configs "
			           "must be at least 1")
		if not self.newton_tol > 0 or self.newton_max_iters < 1:
			self._fail("newton_tol", "bad Newton settings")
		if not 0 <= self.guess_spread < 1:
			self._fail("guess_spread", "guess_spread must be in "
			           "[0, 1)")
		if not self.solver_tol > 0:
			self._fail("solver_tol", "solver_tol must be positive")
		if not self.gradient_tol > 0:
			self._fail("gradient_tol", "gradient_tol must be positive")
		if self.max_evaluations < 1:
			self._fail("max_evaluations", "max_evaluations must be at "
			           "least 1")
		if self.n_jobs == 0:
			self._fail("n_jobs", "n_jobs must not be 0")
		if self.x_true is not None:
			if len(self.x_true) != model.n_x:
				self._fail("x_true", "x_true has %d entries for %d "
				           "species" % (len(self.x_true), model.n_x))
			if model.nonnegative and min(self.x_true) < 0:
				self._fail("x_true", "negative concentration in "
				           "x_true")

	def metrics(self):
		kinds = (selection.METRIC_KINDS if self.metric == "both"
		         else (self.metric,))
		return [selection.Metric(k, self.logdet_epsilon) for k in kinds]

	def irk_config(self):
		return integrator.IrkConfig(self.T, newton_tol=self.newton_tol,
		                            newton_max_iters=self.newton_max_iters)

	def solver_options(self):
		"""Keyword arguments for estimation.estimate_initial_state."""
		return dict(gtol=self.gradient_tol, xtol=self.solver_tol,
		            ftol=self.solver_tol, max_nfev=self.max_evaluations)

	def dumps(self):
		return "%s\n\n%s\n" % (EXPERIMENT_HEADER,
		                       "\n".join(self.file_lines()))

	def save(self, filename):
		with open(filename, "w") as f:
			f.write(self.dumps())

class _ConfigProperty(parser.TopLevelProperty):
	"""A top-level property bound to one ExperimentConfig field."""

	def __init__(self, config, field):
		prop = getattr(type(config), field)
		super(_ConfigProperty, self).__init__(
			prop.file_name, config, field, prop.converter)

	def parse_section(self, stream, value):
		self.obj.lines[self.propname] = stream.lineno
		super(_ConfigProperty, self).parse_section(stream, value)

def load_experiment(filename, strict_mode=True):
	"""Read an experiment file; relative network paths resolve against
	the directory the file is in."""
	config = ExperimentConfig()
	config.filename = filename
	config.base_dir = os.path.dirname(os.path.abspath(filename))
	parser.parse_file(filename, config.properties(), EXPERIMENT_HEADER,
	                  strict_mode)
	return config

def loads_experiment(text, filename="<string>", base_dir="",
                     strict_mode=True):
	config = ExperimentConfig()
	config.filename = filename
	config.base_dir = base_dir
	parser.parse_text(text, config.properties(), EXPERIMENT_HEADER,
	                  filename=filename, strict_mode=strict_mode)
	return config

def resolve_network(name, base_dir=""):
	"""Returns (network, x0 or None) for a file path or bundled name.

	A file takes precedence over a bundled network of the same name.
	"""
	path = os.path.join(base_dir, name)
	if os.path.isfile(path):
		return netfile.load_network(path)
	if name in networks.BUNDLED:
		return (networks.BUNDLED[name],
		        np.array(networks.REFERENCE_STATES[name]))
	raise ValueError("%r is neither a network file nor a bundled "
	                 "network (%s)" % (name,
	                                   ", ".join(sorted(networks.BUNDLED))))

class Setup(object):
	"""A validated config together with the network model it runs on."""

	def __init__(self, config):
		self.config = config
		self.net, x0 = resolve_network(config.network, config.base_dir)
		self.model = kinetics.network_model(self.net,
		                                    name=config.network)
		config.validate(self.model)
		if config.x_true is not None:
			x0 = np.array(config.x_true, dtype=float)
		if x0 is None:
			config._fail("x_true", "x_true is required for network "
			             "%r" % config.network)
		self.x_true = x0
		self.irk = config.irk_config()
		self.metrics = config.metrics()

	def r_values(self):
		if self.config.r is not None:
			return [self.config.r]
		return list(range(1, self.model.n_y + 1))

def sample_perturbed_guesses(x_ref, p, q, seed, clamp=False):
	"""q guesses x_ref + delta, each entry of delta uniform on [0, p]."""
	if not p >= 0:
		raise ValueError("perturbation size p must be nonnegative")
	if q < 1:
		raise ValueError("q must be at least 1")
	x_ref = np.asarray(x_ref, dtype=float)
	rng = np.random.default_rng(seed)
	guesses = x_ref + rng.uniform(0, p, size=(q, len(x_ref)))
	if clamp:
		guesses = np.maximum(guesses, 0)
	return list(guesses)

def build_collection(setup, seed):
	"""Atoms for the perturbed guesses of one seed.

	Returns (atoms, kept) where kept lists the 0-based index of the
	guess behind each atom slice. At least two guesses (or the only
	one) must survive.
	"""
	config = setup.config
	guesses = sample_perturbed_guesses(
		setup.x_true, config.p, config.q, seed,
		clamp=setup.model.nonnegative)
	atoms = gramian.averaged_gramian_collection(
		setup.model, None, guesses, config.N, setup.irk,
		n_jobs=config.n_jobs, skip_failed=True)
	if atoms.q < min(2, config.q):
		raise gramian.GuessFailure(
			atoms.failed[-1], "only %d of %d guesses could be "
			"simulated" % (atoms.q, config.q))
	kept = [i for i in range(config.q) if i not in atoms.failed]
	return atoms, kept

def _format_cell(value):
	if value is None:
		return ""
	if isinstance(value, bool):
		return "true" if value else "false"
	if isinstance(value, float):
		return repr(value)
	return str(value)

class Table(object):
	"""Rows of one report file, with a fixed header."""

	def __init__(self, filename, columns):
		self.filename = filename
		self.columns = tuple(columns)
		self.rows = []

	def append(self, *row):
		if len(row) != len(self.columns):
			raise ValueError("%s: row has %d values for %d columns" % (
				self.filename, len(row), len(self.columns)))
		self.rows.append(row)

	def records(self):
		"""The rows as dicts keyed by column name."""
		return [dict(zip(self.columns, row)) for row in self.rows]

	def column(self, name):
		i = self.columns.index(name)
		return [row[i] for row in self.rows]

	def save(self, directory):
		path = os.path.join(directory, self.filename)
		with open(path, "w") as f:
			writer = csv.writer(f, lineterminator="\n")
			writer.writerow(self.columns)
			for row in self.rows:
				writer.writerow([_format_cell(v) for v in row])
		return path

	def __len__(self):
		return len(self.rows)

class SelectionReport(object):
	def __init__(self, selection_table, diffs, stability):
		self.selection = selection_table
		self.diffs = diffs
		self.stability = stability

	@property
	def stable(self):
		"""True if every rerun seed gave the same averaged selections."""
		return all(self.stability.column("stable"))

	def tables(self):
		return [self.selection, self.diffs, self.stability]

def run_selection_experiment(config, atoms=None):
	"""Averaged and single-guess greedy selections for every metric
	and r, and the averaged selections again for each rerun seed."""
	setup = Setup(config)
	if atoms is None:
		atoms, kept = build_collection(setup, config.seed)
	else:
		kept = [i for i in range(config.q) if i not in atoms.failed]
	chosen_table = Table("selection.csv",
	                     ("metric", "r", "guess", "chosen", "objective"))
	diffs = Table("selection_diff.csv",
	              ("metric", "r", "guess", "added", "removed"))
	stability = Table("selection_stability.csv",
	                  ("metric", "r", "seed", "chosen", "stable"))

	averaged = {}
	for m in setup.metrics:
		for r in setup.r_values():
			avg = selection.greedy_select(atoms, r, m,
			                              n_jobs=config.n_jobs)
			averaged[(m.kind, r)] = avg.chosen
			chosen_table.append(m.kind, r, "avg", avg.chosen.label(),
			                    avg.objective)
			stability.append(m.kind, r, config.seed, avg.chosen.label(),
			                 True)
			for k, index in enumerate(kept):
				single = selection.greedy_select(
					atoms.single_guess(k), r, m)
				chosen_table.append(m.kind, r, index + 1,
				                    single.chosen.label(),
				                    single.objective)
				added = SensorSet(set(single.chosen) - set(avg.chosen))
				removed = SensorSet(set(avg.chosen) - set(single.chosen))
				diffs.append(m.kind, r, index + 1, added.label(),
				             removed.label())

	for seed in config.rerun_seeds:
		rerun, _ = build_collection(setup, seed)
		for m in setup.metrics:
			for r in setup.r_values():
				chosen = selection.greedy_select(
					rerun, r, m, n_jobs=config.n_jobs).chosen
				stable = chosen == averaged[(m.kind, r)]
				if not stable:
					logger.info("seed %d: %s selection of %d sensors "
					            "changed to %s", seed, m.kind, r,
					            chosen.label())
				stability.append(m.kind, r, seed, chosen.label(), stable)

	return SelectionReport(chosen_table, diffs, stability)

class GainReport(object):
	def __init__(self, gains):
		self.gains = gains

	def tables(self):
		return [self.gains]

def run_gain_experiment(config, atoms=None):
	"""Marginal gain per greedy step: averaged metric against the
	spread of the single-guess gains.

	Each guess runs its own greedy selection, so step i of a single-guess
	run may add a different sensor than step i of the averaged run.
	"""
	setup = Setup(config)
	if atoms is None:
		atoms, _ = build_collection(setup, config.seed)
	steps = config.r or setup.model.n_y
	gains = Table("gains.csv", ("step", "metric", "avg_gain",
	                            "single_mean", "single_min",
	                            "single_max"))
	for m in setup.metrics:
		avg = selection.greedy_select(atoms, steps, m,
		                              n_jobs=config.n_jobs)
		singles = [selection.greedy_select(atoms.single_guess(k), steps,
		                                   m)
		           for k in range(atoms.q)]
		for step in range(1, steps + 1):
			values = [s.gains[step - 1][2] for s in singles]
			gains.append(step, m.kind, avg.gains[step - 1][2],
			             float(np.mean(values)), float(np.min(values)),
			             float(np.max(values)))
	return GainReport(gains)

class EstimationReport(object):
	def __init__(self, runs, summary):
		self.runs = runs
		self.summary = summary

	def optimal(self, fraction):
		"""True if some optimal selection matched the best random one."""
		return any(row["optimal"] for row in self.summary.records()
		           if row["fraction"] == fraction)

	def tables(self):
		return [self.runs, self.summary]

def _estimate_set(setup, S, guess):
	config = setup.config
	try:
		y = estimation.lifted_output(setup.model, S, setup.x_true,
		                             config.N, setup.irk)
		prob = estimation.EstimationProblem(setup.model, S, y, guess)
		result = estimation.estimate_initial_state(
			prob, config.N, setup.irk, x_true=setup.x_true,
			**config.solver_options())
	except NumericalError as e:
		logger.warning("estimation with sensors %s failed: %s",
		               S.label(), e)
		return float("nan"), False
	return result.relative_error, result.converged

def estimation_start(setup, seed_sequence):
	"""x_true with each entry scaled by 1 + U[-spread, spread]."""
	rng = np.random.default_rng(seed_sequence)
	spread = setup.config.guess_spread
	scale = 1 + rng.uniform(-spread, spread, size=setup.model.n_x)
	return setup.x_true * scale

def run_estimation_experiment(config, atoms=None):
	"""Relative estimation error of the greedy selections against
	num_random_configs random selections, per sensor fraction."""
	setup = Setup(config)
	if atoms is None:
		atoms, _ = build_collection(setup, config.seed)
	n_y = setup.model.n_y
	start_seq, random_seq = np.random.SeedSequence(config.seed).spawn(2)
	guess = estimation_start(setup, start_seq)
	random_seeds = [int(s) for s in
	                random_seq.generate_state(config.num_random_configs)]

	runs = Table("estimation.csv", ("fraction", "method", "seed",
	                                "chosen", "relative_error",
	                                "converged"))
	summary = Table("estimation_summary.csv",
	                ("fraction", "method", "relative_error", "random_min",
	                 "random_median", "optimal"))
	# Estimation is deterministic, so each sensor set is solved once.
	solved = {}
	for fraction in config.sensor_fractions:
		r = max(1, int(round(fraction * n_y)))
		optimal = [(m.kind, selection.greedy_select(
			atoms, r, m, n_jobs=config.n_jobs).chosen)
		           for m in setup.metrics]
		randoms = [selection.random_select(n_y, r, seed).chosen
		           for seed in random_seeds]
		pending = sorted(set(S for _, S in optimal).union(randoms)
		                 .difference(solved))
		results = Parallel(n_jobs=config.n_jobs)(
			delayed(_estimate_set)(setup, S, guess) for S in pending)
		solved.update(zip(pending, results))
		logger.info("fraction %.3g: %d sensors, %d sets solved", fraction,
		            r, len(solved))

		for kind, S in optimal:
			error, converged = solved[S]
			runs.append(fraction, "greedy-" + kind, None, S.label(),
			            error, converged)
		random_errors = []
		for seed, S in zip(random_seeds, randoms):
			error, converged = solved[S]
			runs.append(fraction, "random", seed, S.label(), error,
			            converged)
			if np.isfinite(error):
				random_errors.append(error)
		best = min(random_errors) if random_errors else float("nan")
		median = (float(np.median(random_errors)) if random_errors
		          else float("nan"))
		for kind, S in optimal:
			error = solved[S][0]
			summary.append(fraction, "greedy-" + kind, error, best,
			               median,
			               bool(error <= best + OPTIMALITY_TOLERANCE))
	return EstimationReport(runs, summary)

def run_experiment(config, output_dir=None):
	"""Run all three experiments on one shared collection and write
	their tables next to a copy of the settings; returns the paths
	written."""
	setup = Setup(config)
	if output_dir is None:
		output_dir = os.path.join(config.base_dir, config.output_dir)
	if not os.path.isdir(output_dir):
		os.makedirs(output_dir)
	atoms, _ = build_collection(setup, config.seed)
	logger.info("built %r for %s", atoms, config.network)
	reports = [
		run_selection_experiment(config, atoms=atoms),
		run_gain_experiment(config, atoms=atoms),
		run_estimation_experiment(config, atoms=atoms),
	]
	paths = []
	for report in reports:
		for table in report.tables():
			paths.append(table.save(output_dir))
	settings = os.path.join(output_dir, "experiment.exp")
	config.save(settings)
	paths.append(settings)
	logger.info("wrote %d report files to %s", len(paths), output_dir)
	return paths

TEST_EXPERIMENT_FILE = """
Experiment File v1

# Small desk-scale run.
network = desk6
T = 0.001
N = 30
q = 4
p = 0.5
r = 2
metric = both
seed = 7
num_random_configs = 5
sensor_fractions = 0.5
rerun_seeds = 11
"""

CONFIGS_DIR = os.path.join(os.path.dirname(__file__), os.pardir,
                           "configs")

def _config(**changes):
	config = loads_experiment(TEST_EXPERIMENT_FILE)
	config.set_values(**changes)
	return config

def _read_csv(path):
	with open(path) as f:
		return list(csv.reader(f))

class TestExperiments(unittest.TestCase):
	def test_load(self):
		config = loads_experiment(TEST_EXPERIMENT_FILE)
		self.assertEqual(config.N, 30)
		self.assertEqual(config.T, 0.001)
		self.assertEqual(config.sensor_fractions, [0.5])
		self.assertEqual(config.rerun_seeds, [11])
		self.assertEqual(config.num_random_configs, 5)
		self.assertEqual(config.logdet_epsilon, 1e-10)
		self.assertEqual([m.kind for m in config.metrics()],
		                 ["trace", "logdet"])
		again = loads_experiment(config.dumps())
		self.assertEqual(again, config)

	def test_bad_config(self):
		text = TEST_EXPERIMENT_FILE.replace("q = 4", "q = 0")
		config = loads_experiment(text, filename="bad.exp")
		with self.assertRaises(parser.ParseException) as cm:
			Setup(config)
		self.assertEqual(cm.exception.lineno, 8)
		with self.assertRaises(parser.ParseException):
			loads_experiment(TEST_EXPERIMENT_FILE + "colour = red\n")
		with self.assertRaises(ValueError):
			Setup(_config(network="no-such-network"))

	def test_sample_guesses(self):
		x = np.array([1.0, 2.0, 3.0])
		for guess in sample_perturbed_guesses(x, 0.0, 3, seed=1):
			np.testing.assert_array_equal(guess, x)
		a = sample_perturbed_guesses(x, 2.0, 5, seed=3)
		b = sample_perturbed_guesses(x, 2.0, 5, seed=3)
		self.assertEqual(np.array(a).tobytes(), np.array(b).tobytes())
		many = np.array(sample_perturbed_guesses(np.zeros(3), 2.0,
		                                         10000, seed=4))
		np.testing.assert_allclose(np.mean(many, axis=0), 1.0, atol=0.02)
		self.assertTrue(np.all(many >= 0) and np.all(many <= 2.0))

	def test_zero_dynamics_selection(self):
		net = kinetics.ReactionNetwork([[1, 0, 0], [0, 1, 0]],
		                               [[0, 1, 0], [0, 0, 1]],
		                               [0.0, 0.0], [0.0, 0.0])
		directory = tempfile.mkdtemp()
		try:
			path = os.path.join(directory, "still.net")
			netfile.save_network(net, path, x0=[1.0, 0.5, 0.2])
			config = _config(network="still.net", metric="trace",
			                 r=None, rerun_seeds=[1, 2])
			config.base_dir = directory
			report = run_selection_experiment(config)
		finally:
			shutil.rmtree(directory)
		self.assertTrue(report.stable)
		for row in report.diffs.records():
			self.assertEqual((row["added"], row["removed"]), ("", ""))
		self.assertEqual(len(report.selection), 3 * 5)

	def test_single_guess_collection(self):
		config = _config(q=1, metric="logdet", rerun_seeds=[])
		report = run_selection_experiment(config)
		chosen = report.selection.column("chosen")
		self.assertEqual(report.selection.column("guess"), ["avg", 1])
		self.assertEqual(chosen[0], chosen[1])

	def test_selection_robust(self):
		# Five seeds, q = 10 and p at twice the mean true concentration.
		x = networks.DESK6_X_TRUE
		config = _config(N=100, q=10, p=2 * float(np.mean(x)), r=3,
		                 rerun_seeds=[1, 2, 3, 4])
		report = run_selection_experiment(config)
		self.assertEqual(len(report.stability), 2 * 5)
		self.assertTrue(report.stable)

	def test_gains(self):
		config = _config(r=None)
		report = run_gain_experiment(config)
		self.assertEqual(len(report.gains), 2 * 6)
		for row in report.gains.records():
			self.assertLessEqual(row["single_min"], row["single_mean"])
			self.assertLessEqual(row["single_mean"], row["single_max"])
		logdet = [row["avg_gain"] for row in report.gains.records()
		          if row["metric"] == "logdet"]
		for before, after in zip(logdet, logdet[1:]):
			self.assertGreaterEqual(before, after - 1e-9)

	def test_gains_follow_own_paths(self):
		config = _config(r=None)
		setup = Setup(config)
		atoms, _ = build_collection(setup, config.seed)
		report = run_gain_experiment(config, atoms=atoms)
		trace = selection.Metric(selection.TRACE)
		rows = [row for row in report.gains.records()
		        if row["metric"] == "trace"]
		paths = [selection.greedy_select(atoms.single_guess(k), 6, trace)
		         for k in range(atoms.q)]
		for row in rows:
			own = [p.gains[row["step"] - 1][2] for p in paths]
			self.assertAlmostEqual(row["single_mean"], np.mean(own),
			                       delta=1e-12 * max(1.0, max(own)))
			self.assertEqual(row["single_max"], max(own))

	def test_gains_identical_guesses(self):
		config = _config(p=0.0, r=None)
		for row in run_gain_experiment(config).gains.records():
			self.assertEqual(row["single_min"], row["single_max"])
			self.assertAlmostEqual(row["avg_gain"], row["single_mean"],
			                       delta=1e-12 * max(1.0, abs(
				                       row["avg_gain"])))

	def test_estimation_optimal(self):
		# Fractions 1/3, 1/2 and 2/3 of the six desk6 sensors.
		config = _config(N=60, num_random_configs=200, gradient_tol=1e-14,
		                 sensor_fractions=[1 / 3.0, 0.5, 2 / 3.0])
		report = run_estimation_experiment(config)
		self.assertEqual(len(report.runs), 3 * (2 + 200))
		for fraction in config.sensor_fractions:
			self.assertTrue(report.optimal(fraction), fraction)

	def test_estimation_full_sensing(self):
		config = _config(sensor_fractions=[1.0], num_random_configs=3)
		report = run_estimation_experiment(config)
		for error in report.runs.column("relative_error"):
			self.assertLessEqual(error, 1e-5)

	def test_reproducible(self):
		config = _config()
		first = tempfile.mkdtemp()
		second = tempfile.mkdtemp()
		try:
			paths = run_experiment(config, output_dir=first)
			run_experiment(config, output_dir=second)
			self.assertEqual(
				sorted(os.path.basename(p) for p in paths),
				["estimation.csv", "estimation_summary.csv",
				 "experiment.exp", "gains.csv", "selection.csv",
				 "selection_diff.csv", "selection_stability.csv"])
			self.assertEqual(
				load_experiment(os.path.join(first, "experiment.exp")),
				config)
			for path in paths:
				name = os.path.basename(path)
				with open(path) as f:
					a = f.read()
				with open(os.path.join(second, name)) as f:
					self.assertEqual(a, f.read())
			header = _read_csv(os.path.join(first, "gains.csv"))[0]
			self.assertEqual(header, ["step", "metric", "avg_gain",
			                          "single_mean", "single_min",
			                          "single_max"])
		finally:
			shutil.rmtree(first)
			shutil.rmtree(second)

	@unittest.skipUnless(os.path.isdir(CONFIGS_DIR),
	                     "configs directory not available")
	def test_desk6_config(self):
		config = load_experiment(os.path.join(CONFIGS_DIR, "desk6.exp"))
		setup = Setup(config)
		self.assertEqual(setup.net, networks.DESK6)
		np.testing.assert_array_equal(setup.x_true,
		                              networks.DESK6_X_TRUE)
		self.assertEqual(setup.r_values(), [1, 2, 3, 4, 5, 6])
		self.assertEqual(config.sensor_fractions,
		                 [1 / 3.0, 0.5, 2 / 3.0])

	@unittest.skipUnless(os.path.isdir(CONFIGS_DIR),
	                     "configs directory not available")
	def test_combustion_scale_config(self):
		path = os.path.join(CONFIGS_DIR, "combustion_scale.exp")
		config = load_experiment(path)
		self.assertEqual((config.T, config.N, config.q),
		                 (1e-12, 1000, 10))
		self.assertEqual(config.x_true,
		                 [2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.2, 0.0])
		config.set_values(num_random_configs=3, rerun_seeds=[],
		                  sensor_fractions=[1 / 3.0], max_evaluations=50)
		directory = tempfile.mkdtemp()
		started = time.time()
		try:
			paths = run_experiment(config, output_dir=directory)
			elapsed = time.time() - started
			rows = _read_csv(os.path.join(directory, "selection.csv"))
		finally:
			shutil.rmtree(directory)
		self.assertLess(elapsed, 600)
		self.assertEqual(len(paths), 7)
		self.assertEqual(rows[0], ["metric", "r", "guess", "chosen",
		                           "objective"])
		self.assertEqual(len(rows) - 1, 2 * 9 * 11)

if __name__ == "__main__":
	unittest.main()

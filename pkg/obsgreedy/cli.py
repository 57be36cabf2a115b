"""Command line front end: obsgreedy simulate|select|estimate|experiment.

--config takes an experiment file, a network file or the name of a bundled
network. Command line flags override the settings read from it. Results go
to standard output unless --out names a directory.

Exit status is 0 on success, 1 for usage, parse and argument errors and 2
for numerical failures.
"""

from __future__ import absolute_import

import argparse
import csv
import io
import json
import logging
import os
import shutil
import sys
import tempfile
import unittest

import numpy as np

from obsgreedy import estimation
from obsgreedy import experiments
from obsgreedy import fields
from obsgreedy import gramian
from obsgreedy import integrator
from obsgreedy import parser
from obsgreedy import selection
from obsgreedy.model import NumericalError, SensorSet

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

METHODS = ("greedy", "exhaustive", "random")

class UsageError(Exception):
	pass

class _ArgumentParser(argparse.ArgumentParser):
	"""argparse exits with status 2 on bad usage; we use 1."""

	def error(self, message):
		self.print_usage(sys.stderr)
		self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))

def _first_line(filename):
	with open(filename) as f:
		for line in f:
			if line.strip() and not parser.COMMENT_LINE_RE.match(line):
				return line.strip()
	return ""

def load_config(name):
	"""An ExperimentConfig for an experiment file, network file or
	bundled network name; None gives the defaults."""
	if name is None:
		return experiments.ExperimentConfig()
	if os.path.isfile(name):
		if _first_line(name) == experiments.EXPERIMENT_HEADER:
			return experiments.load_experiment(name)
		config = experiments.ExperimentConfig(
			network=os.path.basename(name))
		config.filename = name
		config.base_dir = os.path.dirname(os.path.abspath(name))
		return config
	return experiments.ExperimentConfig(network=name)

def _apply_overrides(config, args):
	for name in ("seed", "metric", "r", "N", "T", "n_jobs"):
		value = getattr(args, name, None)
		if value is not None:
			setattr(config, name, value)
	if getattr(args, "x_true", None) is not None:
		config.x_true = args.x_true
	return config

def _converted(converter):
	"""Wrap a fields converter for argparse."""
	def convert(s):
		try:
			return converter(s)
		except ValueError as e:
			raise argparse.ArgumentTypeError(str(e))
	convert.__name__ = converter.__name__
	return convert

def _output(args, filename):
	"""A writable stream: the file in --out, or standard output."""
	if args.out is None:
		return None
	if not os.path.isdir(args.out):
		os.makedirs(args.out)
	return open(os.path.join(args.out, filename), "w")

def _emit(args, stdout, filename, text):
	f = _output(args, filename)
	if f is None:
		stdout.write(text)
		return
	with f:
		f.write(text)
	logger.info("wrote %s", f.name)

def _csv_text(header, rows):
	buf = io.StringIO()
	writer = csv.writer(buf, lineterminator="\n")
	writer.writerow(header)
	for row in rows:
		writer.writerow([repr(float(v)) for v in row])
	return buf.getvalue()

def _json_text(doc):
	return json.dumps(doc, indent=2, sort_keys=True) + "\n"

def cmd_simulate(args, stdout):
	config = _apply_overrides(load_config(args.config), args)
	setup = experiments.Setup(config)
	traj = integrator.simulate(setup.model, setup.x_true, config.N,
	                           setup.irk)
	if args.format == "json":
		text = _json_text({
			"species": list(setup.net.species),
			"T": config.T,
			"states": traj.states.tolist(),
		})
	else:
		text = _csv_text(setup.net.species, traj.states)
	_emit(args, stdout, "trajectory." + args.format, text)

def _atoms_for(args, config):
	if args.atoms is not None:
		return gramian.import_atoms(args.atoms)
	setup = experiments.Setup(config)
	atoms, _ = experiments.build_collection(setup, config.seed)
	return atoms

def cmd_select(args, stdout):
	config = _apply_overrides(load_config(args.config), args)
	atoms = _atoms_for(args, config)
	metric = selection.Metric(args.metric or selection.TRACE,
	                          config.logdet_epsilon)
	r = config.r
	if r is None:
		raise UsageError("select needs --r or an 'r' setting")
	if args.method == "greedy":
		result = selection.greedy_select(atoms, r, metric,
		                                 n_jobs=config.n_jobs)
	elif args.method == "exhaustive":
		result = selection.exhaustive_select(atoms, r, metric)
	else:
		result = selection.random_select(atoms.n_y, r, config.seed,
		                                 atoms=atoms, metric=metric)
	if args.format == "json":
		_emit(args, stdout, "selection.json",
		      _json_text(result.to_document()))
	else:
		_emit(args, stdout, "selection.txt",
		      result.chosen.label() + "\n")

def cmd_estimate(args, stdout):
	config = _apply_overrides(load_config(args.config), args)
	setup = experiments.Setup(config)
	if args.measurements is not None:
		S, y = estimation.load_measurements(args.measurements)
		if args.sensors is not None and args.sensors != S:
			raise UsageError("--sensors %s do not match the sensors "
			                 "of %s" % (args.sensors.label(),
			                            args.measurements))
		N = len(y) // len(S)
		x_true = None
	else:
		S = args.sensors
		if S is None:
			raise UsageError("estimate needs --sensors or "
			                 "--measurements")
		N = config.N
		x_true = setup.x_true
		y = estimation.lifted_output(setup.model, S, x_true, N,
		                             setup.irk)
	if args.x0 is not None:
		guess = args.x0
	else:
		start_seq, _ = np.random.SeedSequence(config.seed).spawn(2)
		guess = experiments.estimation_start(setup, start_seq)
	prob = estimation.EstimationProblem(setup.model, S, y, guess)
	result = estimation.estimate_initial_state(
		prob, N, setup.irk, x_true=x_true, **config.solver_options())
	if args.format == "json":
		_emit(args, stdout, "estimate.json",
		      _json_text(result.to_document()))
	else:
		_emit(args, stdout, "estimate.csv",
		      _csv_text(setup.net.species, [result.x_hat]))

def cmd_experiment(args, stdout):
	config = _apply_overrides(load_config(args.config), args)
	paths = experiments.run_experiment(config, output_dir=args.out)
	for path in paths:
		stdout.write(path + "\n")

COMMANDS = {
	"simulate": cmd_simulate,
	"select": cmd_select,
	"estimate": cmd_estimate,
	"experiment": cmd_experiment,
}

def _common_arguments(p):
	p.add_argument("--config", help="experiment file, network file or "
	               "bundled network name")
	p.add_argument("--seed", type=_converted(fields.integer))
	p.add_argument("--out", help="directory to write results into")
	p.add_argument("--format", choices=("csv", "json"), default="csv")
	p.add_argument("--N", type=_converted(fields.integer),
	               help="observation window")
	p.add_argument("--T", type=_converted(fields.real),
	               help="step size")
	p.add_argument("--n-jobs", dest="n_jobs",
	               type=_converted(fields.integer))
	p.add_argument("-v", "--verbose", action="count", default=0)
	p.add_argument("-q", "--quiet", action="store_true")

def _sensor_set(s):
	return SensorSet.from_one_based(fields.integers(s))

def build_parser():
	p = _ArgumentParser(
		prog="obsgreedy",
		description="Observability-based sensor selection for "
		            "nonlinear networks.")
	sub = p.add_subparsers(dest="command", metavar="command",
	                       parser_class=_ArgumentParser)

	sim = sub.add_parser("simulate", help="integrate a network and "
	                     "print its trajectory")
	_common_arguments(sim)
	sim.add_argument("--x0", dest="x_true",
	                 type=_converted(fields.reals),
	                 help="initial state (default: the reference state)")

	sel = sub.add_parser("select", help="choose r sensors")
	_common_arguments(sel)
	sel.add_argument("--metric", choices=selection.METRIC_KINDS)
	sel.add_argument("--r", type=_converted(fields.integer))
	sel.add_argument("--method", choices=METHODS, default="greedy")
	sel.add_argument("--atoms", help="directory of exported Gramian "
	                 "atoms to select from")

	est = sub.add_parser("estimate", help="estimate the initial state "
	                     "from selected sensors")
	_common_arguments(est)
	est.add_argument("--sensors", type=_converted(_sensor_set),
	                 help="1-based sensor indices, e.g. 1,3")
	est.add_argument("--measurements", help="measurement CSV file")
	est.add_argument("--x0", type=_converted(fields.reals),
	                 help="starting guess")

	exp = sub.add_parser("experiment", help="run the selection, gain "
	                     "and estimation experiments")
	_common_arguments(exp)
	exp.add_argument("--metric", choices=selection.METRIC_KINDS)
	exp.add_argument("--r", type=_converted(fields.integer))
	return p

def _configure_logging(args):
	if args.quiet:
		level = logging.ERROR
	elif args.verbose > 1:
		level = logging.DEBUG
	elif args.verbose:
		level = logging.INFO
	else:
		level = logging.WARNING
	logging.basicConfig(level=level,
	                    format="%(levelname)s %(name)s: %(message)s")

def main(argv=None, stdout=None):
	"""Run the command line; returns the exit status."""
	stdout = stdout or sys.stdout
	p = build_parser()
	try:
		args = p.parse_args(argv)
	except SystemExit as e:
		return e.code
	if args.command is None:
		p.print_usage(sys.stderr)
		return EXIT_USAGE
	_configure_logging(args)
	try:
		COMMANDS[args.command](args, stdout)
	except NumericalError as e:
		logger.error("%s", e)
		return EXIT_NUMERICAL
	except (parser.ParseException, UsageError, ValueError,
	        OSError) as e:
		logger.error("%s", e)
		return EXIT_USAGE
	return EXIT_OK

def _run(*argv):
	out = io.StringIO()
	status = main(list(argv), stdout=out)
	return status, out.getvalue()

class TestCli(unittest.TestCase):
	def setUp(self):
		self.directory = tempfile.mkdtemp()

	def tearDown(self):
		shutil.rmtree(self.directory)

	def _modular_atoms(self):
		# Trace weights 3, 1, 2 on three decoupled states.
		atoms = np.zeros((1, 3, 3, 3))
		for j, w in enumerate([3.0, 1.0, 2.0]):
			atoms[0, j, j, j] = w
		path = os.path.join(self.directory, "atoms")
		gramian.export_atoms(gramian.GramianAtoms(atoms, 1), path)
		return path

	def test_select_modular(self):
		status, out = _run("select", "--atoms", self._modular_atoms(),
		                   "--metric", "trace", "--r", "2", "-q")
		self.assertEqual(status, EXIT_OK)
		self.assertEqual(out, "1,3\n")

	def test_select_json(self):
		status, out = _run("select", "--atoms", self._modular_atoms(),
		                   "--metric", "trace", "--r", "1",
		                   "--format", "json", "-q")
		self.assertEqual(status, EXIT_OK)
		doc = json.loads(out)
		self.assertEqual(doc["chosen"], [1])
		self.assertEqual(doc["objective"], 3.0)
		self.assertEqual(doc["method"], "greedy")

	def test_simulate(self):
		status, out = _run("simulate", "--config", "desk6", "--N", "10",
		                   "-q")
		self.assertEqual(status, EXIT_OK)
		rows = list(csv.reader(io.StringIO(out)))
		self.assertEqual(rows[0], ["H2", "O2", "H", "O", "OH", "H2O"])
		self.assertEqual(len(rows) - 1, 10)
		self.assertEqual([float(v) for v in rows[1]],
		                 [1.0, 0.6, 0.1, 0.2, 0.1, 0.3])

	def test_simulate_network_file(self):
		path = os.path.join(self.directory, "decay.net")
		with open(path, "w") as f:
			f.write("Reaction Network File v1\n\nspecies = A\nx0 = 1.0\n\n"
			        "Reaction 1\nq = 1\nw = 0\nv = 1.0\nb = 0.0\n")
		status, _ = _run("simulate", "--config", path, "--N", "5",
		                 "--out", self.directory, "-q")
		self.assertEqual(status, EXIT_OK)
		with open(os.path.join(self.directory,
		                       "trajectory.csv")) as f:
			rows = list(csv.reader(f))
		self.assertEqual(len(rows), 6)
		values = [float(row[0]) for row in rows[1:]]
		self.assertEqual(values, sorted(values, reverse=True))

	def test_estimate(self):
		status, out = _run("estimate", "--config", "desk6",
		                   "--sensors", "1,2,3,4,5,6", "--N", "20",
		                   "--format", "json", "-q")
		self.assertEqual(status, EXIT_OK)
		doc = json.loads(out)
		self.assertTrue(doc["converged"])
		self.assertLessEqual(doc["relative_error"], 1e-5)

	def test_experiment(self):
		path = os.path.join(self.directory, "small.exp")
		with open(path, "w") as f:
			f.write(experiments.TEST_EXPERIMENT_FILE)
		out_dir = os.path.join(self.directory, "results")
		status, out = _run("experiment", "--config", path,
		                   "--out", out_dir, "-q")
		self.assertEqual(status, EXIT_OK)
		self.assertEqual(len(out.splitlines()), 7)
		for name in ("selection.csv", "gains.csv", "estimation.csv"):
			self.assertTrue(os.path.exists(os.path.join(out_dir, name)))
		saved = experiments.load_experiment(
			os.path.join(out_dir, "experiment.exp"))
		self.assertEqual(saved, experiments.load_experiment(path))

	def test_usage_errors(self):
		self.assertEqual(_run("simulate", "--bogus", "-q")[0],
		                 EXIT_USAGE)
		self.assertEqual(_run()[0], EXIT_USAGE)
		self.assertEqual(_run("select", "--config", "desk6", "--r", "9",
		                      "--N", "5", "-q")[0], EXIT_USAGE)
		self.assertEqual(_run("simulate", "--config", "nowhere",
		                      "-q")[0], EXIT_USAGE)

	def test_bad_config_file(self):
		path = os.path.join(self.directory, "bad.exp")
		with open(path, "w") as f:
			f.write("Experiment File v1\n\nN = many\n")
		self.assertEqual(_run("simulate", "--config", path, "-q")[0],
		                 EXIT_USAGE)

	def test_numerical_failure(self):
		# One Newton update cannot meet the stage tolerance at this
		# step size.
		path = os.path.join(self.directory, "coarse.exp")
		with open(path, "w") as f:
			f.write("Experiment File v1\n\nnetwork = desk6\nT = 0.1\n"
			        "newton_max_iters = 1\n")
		status, _ = _run("simulate", "--config", path, "--N", "3", "-q")
		self.assertEqual(status, EXIT_NUMERICAL)

if __name__ == "__main__":
	unittest.main()

"""Class that represents an entire reaction network file."""

from __future__ import absolute_import

import os
import tempfile
import unittest

import numpy as np

from obsgreedy import fields
from obsgreedy import parser
from obsgreedy.kinetics import ReactionNetwork
from obsgreedy.model import DimensionError

NETWORK_HEADER = "Reaction Network File v1"

NETWORK_HEADER_FORMAT = """
%(header)s

# Note: Use the pound sign ('#') to start comment lines.
# Sensor and reaction indices start from 1.

species = %(species)s
"""

class Reaction(fields.Record):
	"""One reversible reaction: coefficients q, w and rates v, b."""
	SECTION_NAME = "Reaction"

	q = fields.Field("q", fields.integers)
	w = fields.Field("w", fields.integers)
	v = fields.Field("v", fields.real)
	b = fields.Field("b", fields.real)

class Measurement(fields.Record):
	"""One sensor: the row c_j of the measurement matrix."""
	SECTION_NAME = "Measurement"

	c = fields.Field("c", fields.reals)

class SectionList(object):
	"""Collects every section of one record type, keyed by index.

	This implements the section protocol from parser.py; each matching
	header creates a new record which then parses its own lines.
	"""
	def __init__(self, record_type):
		self.record_type = record_type
		self.records = {}

	def header_regexp(self):
		return self.record_type.header_regexp()

	def parse_section(self, stream, index, name=None):
		index = int(index)
		if index in self.records:
			stream.exception("%s %d defined multiple times" % (
				self.record_type.SECTION_NAME, index))
		record = self.record_type()
		record.parse_section(stream, index=index, name=name)
		self.records[index] = record

	def ordered(self, filename):
		"""Records in index order; indices must run 1..n."""
		indexes = sorted(self.records)
		for expected, index in enumerate(indexes, 1):
			if index != expected:
				raise parser.ParseException(
					filename, self.records[index].lineno,
					"%s indices must run 1..%d without gaps" % (
						self.record_type.SECTION_NAME,
						len(indexes)))
		return [self.records[i] for i in indexes]

class NetworkFile(object):
	"""Class that represents an entire reaction network file.

	The document holds the species names, one Reaction section per
	reaction and, optionally, one Measurement section per sensor (the
	default is one sensor per species) and a reference state x0:

	  f = NetworkFile()
	  f.load("desk6.net")
	  net = f.network()
	  f = NetworkFile.from_network(net)
	  f.save("copy.net")
	"""

	def __init__(self):
		self.filename = "<string>"
		self.species = None
		self.x0 = None
		self.reactions = []
		self.measurements = []

	@classmethod
	def from_network(cls, net, x0=None):
		result = cls()
		result.species = list(net.species)
		for j in range(net.n_r):
			reaction = Reaction(
				q=[int(c) for c in net.q[j]],
				w=[int(c) for c in net.w[j]],
				v=float(net.v[j]),
				b=float(net.b[j]),
			)
			reaction.object_name = net.labels[j]
			result.reactions.append(reaction)
		if not np.array_equal(net.measurement, np.eye(net.n_x)):
			result.measurements = [
				Measurement(c=[float(c) for c in row])
				for row in net.measurement]
		if x0 is not None:
			result.x0 = [float(c) for c in x0]
		return result

	def _properties(self):
		return [
			parser.TopLevelProperty("species", self, "species",
			                        fields.names),
			parser.TopLevelProperty("x0", self, "x0", fields.reals),
		]

	def _parse(self, run):
		reactions = SectionList(Reaction)
		measurements = SectionList(Measurement)
		run([reactions, measurements] + self._properties())
		self.reactions = reactions.ordered(self.filename)
		self.measurements = measurements.ordered(self.filename)

	def load(self, filename, strict_mode=True):
		"""Load a network file from the given filename."""
		self.filename = filename
		self._parse(lambda objects: parser.parse_file(
			filename, objects, NETWORK_HEADER, strict_mode))

	def loads(self, text, filename="<string>", strict_mode=True):
		"""Load a network document held in a string."""
		self.filename = filename
		self._parse(lambda objects: parser.parse_text(
			text, objects, NETWORK_HEADER, filename=filename,
			strict_mode=strict_mode))

	def _error(self, record, message):
		lineno = record.lineno if record is not None else 1
		raise parser.ParseException(self.filename, lineno or 1, message)

	def network(self):
		"""Validate the document and build its ReactionNetwork."""
		if self.species is None:
			self._error(None, "missing field 'species'")
		if not self.reactions:
			self._error(None, "no Reaction sections")
		n_x = len(self.species)
		for j, reaction in enumerate(self.reactions, 1):
			missing = reaction.missing_fields()
			if missing:
				self._error(reaction, "reaction %d: missing field "
				            "%r" % (j, missing[0]))
			for name in ("q", "w"):
				coefficients = getattr(reaction, name)
				if len(coefficients) != n_x:
					self._error(reaction, "reaction %d: field %r "
					            "has %d entries for %d species" % (
						j, name, len(coefficients), n_x))
				if any(c < 0 for c in coefficients):
					self._error(reaction, "reaction %d: negative "
					            "coefficient in %r" % (j, name))
			for name in ("v", "b"):
				if getattr(reaction, name) < 0:
					self._error(reaction, "reaction %d: negative "
					            "rate %s = %r" % (
						j, name, getattr(reaction, name)))
		measurement = None
		if self.measurements:
			for j, m in enumerate(self.measurements, 1):
				if m.c is None or len(m.c) != n_x:
					self._error(m, "measurement %d: field 'c' must "
					            "have %d entries" % (j, n_x))
				if not any(m.c):
					self._error(m, "measurement %d: all-zero row"
					            % j)
			measurement = [m.c for m in self.measurements]
		if self.x0 is not None and len(self.x0) != n_x:
			self._error(None, "field 'x0' has %d entries for %d "
			            "species" % (len(self.x0), n_x))
		try:
			return ReactionNetwork(
				[r.q for r in self.reactions],
				[r.w for r in self.reactions],
				[r.v for r in self.reactions],
				[r.b for r in self.reactions],
				species=self.species,
				measurement=measurement,
				labels=[r.object_name for r in self.reactions],
			)
		except (ValueError, DimensionError) as e:
			self._error(None, str(e))

	def dumps(self):
		"""The document as text."""
		parts = [NETWORK_HEADER_FORMAT.strip() % {
			"header": NETWORK_HEADER,
			"species": " ".join(self.species),
		}]
		if self.x0 is not None:
			parts[0] += "\nx0 = %s" % fields.format_value(self.x0)
		for j, reaction in enumerate(self.reactions, 1):
			parts.append(reaction.file_output(j))
		for j, m in enumerate(self.measurements, 1):
			parts.append(m.file_output(j))
		return "\n\n".join(parts) + "\n"

	def save(self, filename):
		"""Save the network file to the given filename."""
		with open(filename, "w") as f:
			f.write(self.dumps())

def parse_network(text, filename="<string>"):
	"""Parse a network document into a validated ReactionNetwork."""
	f = NetworkFile()
	f.loads(text, filename=filename)
	return f.network()

def serialize_network(net, x0=None):
	return NetworkFile.from_network(net, x0=x0).dumps()

def load_network(filename):
	"""Returns (network, x0 or None) read from a network file."""
	f = NetworkFile()
	f.load(filename)
	net = f.network()
	x0 = None if f.x0 is None else np.array(f.x0)
	return net, x0

def save_network(net, filename, x0=None):
	NetworkFile.from_network(net, x0=x0).save(filename)

TEST_NETWORK_FILE = """
Reaction Network File v1

# Note: Use the pound sign ('#') to start comment lines.
# Sensor and reaction indices start from 1.

species = R1 R2

Reaction 1 (2R1 <=> R2)
q = 2 0
w = 0 1
v = 1.0
b = 0.5
"""

BUNDLED_DESK6_FILE = os.path.join(os.path.dirname(__file__), os.pardir,
                                  "configs", "desk6.net")

class TestNetworkFile(unittest.TestCase):
	def test_parse_minimal(self):
		net = parse_network(TEST_NETWORK_FILE)
		self.assertEqual(net.n_r, 1)
		self.assertEqual(net.species, ("R1", "R2"))
		np.testing.assert_array_equal(net.measurement, np.eye(2))
		self.assertEqual(net.labels, ("2R1 <=> R2",))

	def test_serialize(self):
		net = parse_network(TEST_NETWORK_FILE)
		self.assertEqual(serialize_network(net).strip(),
		                 TEST_NETWORK_FILE.strip())

	def test_negative_rate(self):
		text = TEST_NETWORK_FILE.replace("v = 1.0", "v = -1")
		with self.assertRaises(parser.ParseException) as cm:
			parse_network(text, filename="bad.net")
		self.assertIn("negative rate", cm.exception.message)
		self.assertEqual(cm.exception.lineno, 9)

	def test_missing_field(self):
		text = TEST_NETWORK_FILE.replace("b = 0.5\n", "")
		with self.assertRaises(parser.ParseException) as cm:
			parse_network(text)
		self.assertIn("'b'", cm.exception.message)

	def test_dimension_mismatch(self):
		text = TEST_NETWORK_FILE.replace("q = 2 0", "q = 2 0 1")
		with self.assertRaises(parser.ParseException):
			parse_network(text)

	def test_gap_in_indices(self):
		text = TEST_NETWORK_FILE.replace("Reaction 1", "Reaction 2")
		with self.assertRaises(parser.ParseException):
			parse_network(text)

	def test_round_trip_bundled(self):
		from obsgreedy import networks
		for net in networks.BUNDLED.values():
			text = serialize_network(net)
			again = parse_network(text)
			self.assertEqual(again, net)
			self.assertEqual(serialize_network(again), text)

	def test_measurement_and_x0(self):
		from obsgreedy import networks
		net = ReactionNetwork(networks.DESK6.q, networks.DESK6.w,
		                      networks.DESK6.v, networks.DESK6.b,
		                      species=networks.DESK6.species,
		                      measurement=[[1, 0, 0, 0, 0, 0],
		                                   [0, 0.5, 0, 0, 0, 0.5]])
		path = os.path.join(tempfile.mkdtemp(), "net.net")
		x0 = [0.1, 1.0 / 3.0, 0, 0, 0, 2.5]
		save_network(net, path, x0=x0)
		loaded, loaded_x0 = load_network(path)
		self.assertEqual(loaded, net)
		self.assertEqual(list(loaded_x0), x0)

	@unittest.skipUnless(os.path.exists(BUNDLED_DESK6_FILE),
	                     "configs directory not available")
	def test_bundled_file(self):
		from obsgreedy import networks
		net, x0 = load_network(BUNDLED_DESK6_FILE)
		self.assertEqual(net, networks.DESK6)
		self.assertEqual(net.labels, networks.DESK6.labels)
		np.testing.assert_array_equal(x0, networks.DESK6_X_TRUE)

if __name__ == "__main__":
	unittest.main()

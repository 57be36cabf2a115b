"""Typed records that read and write sectioned text documents."""

from __future__ import absolute_import

import re
import unittest

from obsgreedy import parser

# Regexp that matches field assignment lines inside a section.
FIELD_ASSIGNMENT_RE = re.compile(r"\s*(?P<name>\w[\w\.]*)"
                                 r"\s*=\s*"
                                 r"(?P<value>.*\S)?"
                                 r"\s*$")

def real(s):
	return float(s)

def reals(s):
	return [float(v) for v in s.replace(",", " ").split()]

def integers(s):
	result = []
	for v in s.replace(",", " ").split():
		value = float(v)
		if value != int(value):
			raise ValueError("%r is not an integer" % v)
		result.append(int(value))
	return result

def integer(s):
	values = integers(s)
	if len(values) != 1:
		raise ValueError("expected one integer, got %r" % s)
	return values[0]

def names(s):
	return s.replace(",", " ").split()

def format_value(value):
	"""Format a field value so that parsing it back is bit-exact."""
	if isinstance(value, (list, tuple)):
		return " ".join(format_value(v) for v in value)
	if isinstance(value, float):
		return repr(value)
	return str(value)

class Field(property):
	"""Helper wrapper around property() for declaring record fields.

	This is used with Record() (see below). Fields are declared in the
	following way:

		class Reaction(fields.Record):
			SECTION_NAME = "Reaction"
			q = fields.Field("q", fields.integers)
			v = fields.Field("v", fields.real, default=0.0)

	The file name of the field is the key that appears before the '='
	sign; the converter turns the text after it into a value.
	"""
	instance_order = 0
	def __init__(prop, file_name, converter=str, default=None):
		field_number = Field.instance_order
		Field.instance_order += 1
		prop.order = field_number
		prop.file_name = file_name
		prop.converter = converter
		prop.default = default

		def getter(self):
			return self._fields[field_number]
		def setter(self, value):
			self._fields[field_number] = value
		super(Field, prop).__init__(getter, setter)

class Record(object):
	"""Base class for a type whose fields are stored in a document.

	Fields are declared using the Field type; the order in which they
	are declared is preserved, both for positional initialization and
	for the order in which they are written out.
	"""
	SECTION_NAME = None

	def __init__(self, *args, **kwargs):
		self.object_name = None
		# Line number of the section header this record was read
		# from, so later validation can point back into the file.
		self.lineno = None
		self._fields = {}
		self._present = set()
		for f in self.field_names():
			prop = getattr(type(self), f)
			setattr(self, f, prop.default)
		self.set_values(*args, **kwargs)

	@classmethod
	def header_regexp(cls):
		return re.compile(
			r"\s*%s\s+(?P<index>\d+)(\s*\((?P<name>.*)\))?\s*$" % (
				cls.SECTION_NAME), re.I)

	@classmethod
	def field_names(cls):
		props = []
		for f in dir(cls):
			value = getattr(cls, f)
			if isinstance(value, Field):
				props.append((f, value))
		props = sorted(props, key=lambda x: x[1].order)
		return [name for name, _ in props]

	@classmethod
	def field_for_file_name(cls, file_name):
		for field in cls.field_names():
			if getattr(cls, field).file_name == file_name:
				return field
		raise KeyError(file_name)

	def _apply_assignment(self, stream, name, value):
		try:
			field = self.field_for_file_name(name)
		except KeyError:
			stream.exception("unknown field %r in %s section" % (
				name, self.SECTION_NAME))
		converter = getattr(type(self), field).converter
		try:
			setattr(self, field, converter(value or ""))
		except ValueError as e:
			stream.exception("bad value for %r: %s" % (name, e))
		self._present.add(field)

	def parse_section(self, stream, index="0", name=None):
		"""Parse a section, reading assignments from the given stream.

		It is assumed that each line will be an assignment that
		conforms to FIELD_ASSIGNMENT_RE. The function will return once
		an empty line is reached.
		"""
		self.lineno = stream.lineno
		if name:
			self.object_name = name
		while True:
			line = stream.readline()
			if line.strip() == "":
				break
			m = FIELD_ASSIGNMENT_RE.match(line)
			if not m:
				stream.exception("parse error: %r" % line.rstrip())
			self._apply_assignment(stream, **m.groupdict())

	def missing_fields(self):
		"""Names of fields that were never assigned by a parse."""
		return [getattr(type(self), f).file_name
		        for f in self.field_names()
		        if f not in self._present]

	def set_values(self, *args, **kwargs):
		field_names = self.field_names()
		if len(args) > len(field_names):
			raise ValueError("%r only has %d fields" % (
				type(self).__name__, len(field_names)))
		for i, value in enumerate(args):
			setattr(self, field_names[i], value)
			self._present.add(field_names[i])
		for field, value in kwargs.items():
			if field not in field_names:
				raise ValueError("%r has no field %r" % (
					type(self).__name__, field))
			setattr(self, field, value)
			self._present.add(field)

	def section_header(self, index):
		result = "%s %d" % (self.SECTION_NAME, index)
		if self.object_name:
			result += " (%s)" % self.object_name
		return result

	def file_lines(self):
		"""The "name = value" lines for every field that is set."""
		results = []
		for field in self.field_names():
			value = getattr(self, field)
			if value is None:
				continue
			results.append("%s = %s" % (
				getattr(type(self), field).file_name,
				format_value(value)))
		return results

	def file_output(self, index):
		"""Get a description of this record as a document section."""
		return "\n".join([self.section_header(index)]
		                 + self.file_lines())

	def __eq__(self, other):
		return (type(self) == type(other) and
		        all(getattr(self, f) == getattr(other, f)
		            for f in self.field_names()))

	def __ne__(self, other):
		return not self == other

	def __repr__(self):
		return "%s(%s)" % (
			type(self).__name__,
			", ".join("%s=%r" % (f, getattr(self, f))
				for f in self.field_names()))

class _Coordinate(Record):
	SECTION_NAME = "Coordinate"
	x = Field("x", real, default=0.0)
	ys = Field("ys", reals)

class TestRecord(unittest.TestCase):
	def test_defaults_and_values(self):
		c = _Coordinate(ys=[1.0])
		self.assertEqual(c.x, 0.0)
		self.assertEqual(c.ys, [1.0])
		self.assertEqual(c.missing_fields(), ["x"])

	def test_output(self):
		c = _Coordinate(0.1, [1.0, 2.5])
		c.object_name = "origin"
		self.assertEqual(c.file_output(3),
		                 "Coordinate 3 (origin)\nx = 0.1\nys = 1.0 2.5")

	def test_round_trip(self):
		c = _Coordinate(1.0 / 3.0, [2.0 / 3.0, 1e-17])
		text = "Doc v1\n\n" + c.file_output(1) + "\n"
		parsed = _Coordinate()
		parser.parse_text(text, [parsed], "Doc v1")
		self.assertEqual(parsed, c)
		self.assertEqual(parsed.lineno, 3)

	def test_integers(self):
		self.assertEqual(integers("1 0, 2"), [1, 0, 2])
		self.assertEqual(integer("1e3"), 1000)
		with self.assertRaises(ValueError):
			integers("1.5")
		with self.assertRaises(ValueError):
			integer("1 2")

	def test_unknown_field(self):
		text = "Doc v1\nCoordinate 1\nz = 3\n"
		with self.assertRaises(parser.ParseException):
			parser.parse_text(text, [_Coordinate()], "Doc v1")

if __name__ == "__main__":
	unittest.main()

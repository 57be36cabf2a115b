"""Main module for parsing obsgreedy text documents.

Network files and experiment files share one line-oriented format. The main
function in this module is parse_stream(). This takes as an argument a list
of objects which implement the following two methods:

header_regexp() - This is a function that, when called, will return a regexp.
The parser will read the document one line at a time, and it is expected
that each line it encounters will match one of the regexps returned by these
methods. It is expected that the regexp will use named capture groups.

parse_section(stream, **params) - If a line matches the regexp returned by
header_regexp(), this function is invoked, and passed an instance of
InputStream that allows more data to be read from the document using the
methods it implements. Furthermore, any values from named capture groups
matched by the header regexp are passed to the function as named parameters.
"""

from __future__ import absolute_import

import io
import logging
import re
import unittest

logger = logging.getLogger(__name__)

# Lines which match this regexp are comment lines and will be stripped out of
# the input stream.
COMMENT_LINE_RE = re.compile(r"\s*#")

class ParseException(Exception):
	"""An error caused by a failure to parse a document."""

	def __init__(self, filename, lineno, message):
		super(ParseException, self).__init__(message)
		self.filename = filename
		self.lineno = lineno
		self.message = message

	def __str__(self):
		return "%s:%d: %s" % (self.filename, self.lineno, self.message)

	__repr__ = __str__

class InputStream(object):
	"""Wrapper around an I/O stream for reading documents."""
	def __init__(self, stream, filename=None):
		self.stream = stream
		self.filename = filename or getattr(stream, "name", "<string>")
		self.lineno = 0

	def readline(self):
		"""Read a line from input stream, stripping out comments."""
		while True:
			line = self.stream.readline()
			if line == "":
				break
			self.lineno += 1
			if not COMMENT_LINE_RE.match(line):
				break
		return line.rstrip("\r\n") + ("\n" if line else "")

	def exception(self, message, lineno=None):
		raise ParseException(
			self.filename,
			self.lineno if lineno is None else lineno,
			message,
		)

class TopLevelProperty(object):
	"""Helper class that is used to parse top-level "key = value" lines.

	This class implements the section protocol described above, but only
	parses a single line and uses the value to set a single property of an
	object.
	"""
	def __init__(self, name, obj, propname, converter=None):
		self.name = name
		self.obj = obj
		self.propname = propname
		self.converter = converter or (lambda x: x)

	def header_regexp(self):
		return re.compile(r"\s*%s\s*=\s*(?P<value>.*\S)?\s*$" % (
			re.escape(self.name)))

	def parse_section(self, stream, value):
		try:
			setattr(self.obj, self.propname,
			        self.converter(value or ""))
		except ValueError as e:
			stream.exception("bad value for %r: %s" % (self.name, e))

def _read_header(stream, header_line):
	line = stream.readline()
	while line.strip() == "" and line != "":
		line = stream.readline()
	if line.strip() != header_line:
		stream.exception("document must start with the line %r" % (
			header_line))

def _parse_line(sections, stream, line):
	if line.strip() == "":
		return
	for regex, obj in sections:
		m = regex.match(line)
		if m:
			params = m.groupdict()
			obj.parse_section(stream, **params)
			break
	else:
		stream.exception("syntax not recognized: %r" % line.rstrip())

def parse_stream(stream, objects, header_line, strict_mode=True):
	"""Parse a document from the given InputStream.

	'objects' is a list of objects which are expected to conform to the
	protocol described above. In non-strict mode, lines that cannot be
	parsed are logged and skipped; otherwise the first failure is raised.
	"""
	sections = [(o.header_regexp(), o) for o in objects]
	_read_header(stream, header_line)
	warnings = []
	while True:
		line = stream.readline()
		if line == "":
			break
		try:
			_parse_line(sections, stream, line)
		except ParseException as e:
			if strict_mode:
				raise
			warnings.append(str(e))

	for w in warnings:
		logger.warning("%s", w)
	return warnings

def parse_text(text, objects, header_line, filename="<string>",
               strict_mode=True):
	"""Parse a document held in a string."""
	stream = InputStream(io.StringIO(text), filename=filename)
	return parse_stream(stream, objects, header_line, strict_mode)

def parse_file(filename, objects, header_line, strict_mode=True):
	"""Load a document from the given filename."""
	with open(filename, "r") as f:
		stream = InputStream(f, filename=filename)
		return parse_stream(stream, objects, header_line, strict_mode)

class _Holder(object):
	pass

class TestParser(unittest.TestCase):
	TEST_INPUT = """
Test File v1

# Comments are skipped.
alpha = 1.5
name = hello world
"""

	def _properties(self, holder):
		return [
			TopLevelProperty("alpha", holder, "alpha", float),
			TopLevelProperty("name", holder, "name"),
		]

	def test_top_level(self):
		holder = _Holder()
		parse_text(TestParser.TEST_INPUT, self._properties(holder),
		           "Test File v1")
		self.assertEqual(holder.alpha, 1.5)
		self.assertEqual(holder.name, "hello world")

	def test_bad_header(self):
		with self.assertRaises(ParseException) as cm:
			parse_text("Wrong Header\n", [], "Test File v1")
		self.assertEqual(cm.exception.lineno, 1)

	def test_unknown_line_strict(self):
		holder = _Holder()
		text = TestParser.TEST_INPUT + "bogus = 3\n"
		with self.assertRaises(ParseException) as cm:
			parse_text(text, self._properties(holder),
			           "Test File v1", filename="x.exp")
		self.assertEqual(str(cm.exception).split(":")[:2],
		                 ["x.exp", "7"])

	def test_unknown_line_lenient(self):
		holder = _Holder()
		text = TestParser.TEST_INPUT + "bogus = 3\n"
		warnings = parse_text(text, self._properties(holder),
		                      "Test File v1", strict_mode=False)
		self.assertEqual(len(warnings), 1)
		self.assertEqual(holder.alpha, 1.5)

	def test_bad_value(self):
		holder = _Holder()
		with self.assertRaises(ParseException):
			parse_text("Test File v1\nalpha = abc\n",
			           self._properties(holder), "Test File v1")

if __name__ == "__main__":
	unittest.main()

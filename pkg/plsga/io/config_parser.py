"""
Module to parse flat run configuration files

A config file holds one `key = value` pair per line (the `=` may also be whitespace, as
in `population 200`). Text after `#` is a comment and blank lines are skipped.
"""
import logging


class ConfigParserError(Exception):
    def __init__(self, msg, line_number=None):
        if line_number is not None:
            msg = "line {}: {}".format(line_number, msg)
        super().__init__(msg)
        self.line_number = line_number


class FlatConfig:
    """The key / value pairs of a config file, as strings.

    Keys are normalized to lower case with `-` replaced by `_`, matching the command line
    flag names. If `known_keys` is given, any other key is an error.
    """

    def __init__(self, filename, known_keys=None):
        self.filename = filename
        self._values = {}
        self._lines = {}
        self._known_keys = set(known_keys) if known_keys is not None else None
        with open(filename, encoding="utf-8") as f:
            self._parse(f)

    def _parse(self, lines):
        for line_number, line in enumerate(lines, start=1):
            if '#' in line:
                line = line[:line.index('#')]
            line = line.strip()
            if not line:
                continue
            if '=' in line:
                key, _, value = line.partition('=')
            else:
                parts = line.split(maxsplit=1)
                if len(parts) < 2:
                    raise ConfigParserError("Expected 'key = value', got: " + line, line_number)
                key, value = parts
            key = key.strip().lower().replace("-", "_")
            value = value.strip()
            if not key or not value:
                raise ConfigParserError("Expected 'key = value', got: " + line, line_number)
            if self._known_keys is not None and key not in self._known_keys:
                raise ConfigParserError("Unknown key '{}'".format(key), line_number)
            if key in self._values:
                raise ConfigParserError(
                    "Duplicate key '{}' (first set on line {})".format(key, self._lines[key]),
                    line_number)
            self._values[key] = value
            self._lines[key] = line_number
        logging.debug("Read %d keys from %s", len(self._values), self.filename)

    def as_dict(self):
        return dict(self._values)

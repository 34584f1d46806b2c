"""
Collection of generic Python utilities.
"""
from enum import Enum, EnumMeta

__all__ = ["ConfigT", "ConsoleColors", "docopt_sanitize", "parse_bool"]

_TRUE_STRINGS = ("on", "true", "yes", "1")
_FALSE_STRINGS = ("off", "false", "no", "0")


def parse_bool(value):
    """Interprets on/off, true/false, yes/no strings. Non-strings go through bool()"""
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in _TRUE_STRINGS:
            return True
        if lowered in _FALSE_STRINGS:
            return False
        raise ValueError("Not a boolean value: " + value)
    return bool(value)


def docopt_sanitize(docopt_opts):
    """Sanitizes docopt parsed key names
    """
    opts = {}
    for key, val in docopt_opts.items():
        key = key.strip("<>-").replace("-", "_")
        if isinstance(val, str):
            if val.lower() in ("off", "false"):
                val = False
            elif val.lower() in ("on", "true"):
                val = True
        opts[key] = val
    return opts


class ConfigT(object):
    """Base class for configurations.

    Subclasses declare their fields as class-level attributes holding the default value.
    Instances initialize from kwargs and dictionaries with the same keys, converting
    values to the type of the default (int, float, bool or Enum member), so strings read
    from config files and the command line are accepted directly.

    ::\n
     class RunConfig(ConfigT):
        mode = Mode.FAST      # Enum field, accepts "fast" or Mode.FAST
        workers = 1
        output_dir = None     # untyped, stored as given

    Validators registered with `ConfigT.validator` run after every initialization and
    should raise on invalid combinations.
    """
    def __init__(self, opt_dict=None, **opts):
        opt_dict = dict(opt_dict or {})
        opt_dict.update(opts)
        self._init(opt_dict)

    @classmethod
    def fields(cls):
        """The declared field names, in declaration order (bases first)"""
        names = []
        for klass in reversed(cls.__mro__):
            for name, value in vars(klass).items():
                if name.startswith("_") or name in names:
                    continue
                if callable(value) and not isinstance(value, Enum) \
                        or isinstance(value, (classmethod, staticmethod, property, EnumMeta)):
                    continue
                names.append(name)
        return names

    @classmethod
    def coerce(cls, name, value):
        """Converts `value` to the type of the field default"""
        default = getattr(cls, name)
        if value is None or default is None:
            return value
        if isinstance(default, Enum):
            enum_cls = type(default)
            if isinstance(value, enum_cls):
                return value
            parse = getattr(enum_cls, "parse", None)
            return parse(value) if parse else enum_cls[str(value).upper()]
        if isinstance(default, bool):
            return parse_bool(value)
        if isinstance(default, int):
            if isinstance(value, int):
                return value
            try:
                return int(str(value).strip())
            except ValueError:
                pass
            fvalue = float(value)
            if not fvalue.is_integer():
                raise ValueError("{} must be an integer, got {}".format(name, value))
            return int(fvalue)
        if isinstance(default, float):
            return float(value)
        return value

    def _init(self, opts):
        known = self.fields()
        for name, value in opts.items():
            if value is None or name.startswith("_") or name not in known:
                continue
            setattr(self, name, self.coerce(name, value))

        for validator in getattr(type(self), "_validators", ()):
            validator(self)

    @classmethod
    def validator(cls, f):
        """Decorator to register a validator of this config class"""
        if "_validators" not in cls.__dict__:
            cls._validators = list(getattr(cls, "_validators", ()))
        cls._validators.append(f)
        return f

    def as_dict(self):
        return {key: getattr(self, key) for key in self.fields()}

    def __eq__(self, other):
        return type(self) is type(other) and self.as_dict() == other.as_dict()

    def __repr__(self):
        fields = ", ".join("{}={!r}".format(k, v) for k, v in self.as_dict().items())
        return "{}({})".format(type(self).__name__, fields)


class ConsoleColors:
    """Helper class for formatting console text.
    """
    BLACK, RED, GREEN, YELLOW, BLUE, MAGENTA, CYAN, WHITE, _, DEFAULT = range(30, 40)
    NORMAL, BOLD, DIM, UNDERLINED, BLINK, INVERTED, HIDDEN = [a << 8 for a in range(7)]

    _CHANGE_SEQ = "\033[{}m"
    _RESET_SEQ = "\033[0m"

    @classmethod
    def reset(cls):
        return cls._RESET_SEQ

    @classmethod
    def format_text(cls, text, color, style=None):
        style = (style or color) >> 8
        format_seq = str(color & 0x00ff) + ((";" + str(style)) if style else "")
        return cls._CHANGE_SEQ.format(format_seq) + text + cls._RESET_SEQ

"""Sectioned key-value run configuration.

Files are INI (``[section]`` / ``key = value``).  A JSON file holding a
``"config"`` object (as embedded in every run summary) is accepted too, so a
summary can be fed back to reproduce its run.  Lists are comma-separated;
the ``kernel`` key holds JSON.
"""
import configparser
import json


class ConfigError(ValueError):
    pass


def load(path) -> dict:
    path = str(path)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    if path.endswith(".json"):
        data = json.loads(text)
        data = data.get("config", data)
        return {sec: dict(vals) for sec, vals in data.items()}
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0]) from None
    return {sec: dict(parser[sec]) for sec in parser.sections()}


class Section:
    """Typed reader that records every resolved value, defaults included."""

    def __init__(self, name, raw):
        self.name = name
        self.raw = dict(raw or {})
        self.resolved = {}

    def _take(self, key, default, conv):
        if key in self.raw:
            val = self.raw[key]
            try:
                val = conv(val)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{self.name}] {key}: {exc}") from None
        else:
            val = default
        self.resolved[key] = val
        return val

    def str(self, key, default):
        return self._take(key, default, str)

    def int(self, key, default):
        return self._take(key, default, _int)

    def float(self, key, default):
        return self._take(key, default, float)

    def bool(self, key, default):
        return self._take(key, default, _bool)

    def floats(self, key, default):
        return self._take(key, list(default), lambda v: [float(x) for x in _items(v)])

    def ints(self, key, default):
        return self._take(key, list(default), lambda v: [_int(x) for x in _items(v)])

    def json(self, key, default):
        return self._take(key, default, lambda v: json.loads(v) if isinstance(v, str) else v)

    def unknown(self):
        return sorted(set(self.raw) - set(self.resolved))


def _items(v):
    if isinstance(v, (list, tuple)):
        return list(v)
    v = str(v).strip()
    return [x.strip() for x in v.split(",") if x.strip()] if v else []


def _int(v):
    if isinstance(v, bool):
        raise ValueError("expected integer")
    if isinstance(v, float):
        if v != int(v):
            raise ValueError(f"expected integer, got {v}")
        return int(v)
    return int(str(v).strip(), 0)


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected boolean, got {v!r}")


def model_from(sec: Section):
    from .weights.models import DEFAULT_BURN_IN, ModelSpec
    return ModelSpec(
        kind=sec.str("kind", "iid-two-valued"),
        a=sec.float("a", 1.0),
        b=sec.float("b", 2.0),
        p=sec.float("p", 0.5),
        beta=sec.float("beta", 0.0),
        h=sec.float("h", 0.0),
        values=tuple(sec.floats("values", ())),
        probs=tuple(sec.floats("probs", ())),
        kernel=sec.json("kernel", {}),
        kernel_mode=sec.str("kernel_mode", "site"),
        indexing=sec.str("indexing", "site"),
        sampler=sec.str("sampler", "gibbs"),
        sweeps=sec.int("sweeps", DEFAULT_BURN_IN),
        scan=sec.str("scan", "systematic"),
        seed=sec.int("seed", 0),
    )

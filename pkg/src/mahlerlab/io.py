"""Body files (JSON) and canonical JSON output."""
import json
import math

import numpy as np

from . import fixtures
from .body import Ellipsoid, Polytope, SmoothBody
from .errors import GeometryError, ParseError

BUILTINS = ("simplexD2", "simplexS4", "cube", "ball", "octahedron", "regularSimplex",
            "ellipsoid", "random")


def _number(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError("expected a number", path)
    if not math.isfinite(x):
        raise ParseError("expected a finite number", path)
    return float(x)


def _vec3(x, path):
    if not isinstance(x, list) or len(x) != 3:
        raise ParseError("expected a list of three numbers", path)
    return [_number(t, f"{path}[{i}]") for i, t in enumerate(x)]


def _list(doc, key, path):
    if key not in doc:
        raise ParseError(f"missing field {key!r}", path)
    val = doc[key]
    if not isinstance(val, list) or not val:
        raise ParseError("expected a nonempty list", f"{path}.{key}")
    return val


def _halfspaces(doc, path):
    items = _list(doc, "halfspaces", path)
    N, c = [], []
    for i, h in enumerate(items):
        p = f"{path}.halfspaces[{i}]"
        if not isinstance(h, dict):
            raise ParseError("expected an object with fields n and c", p)
        if "n" not in h or "c" not in h:
            raise ParseError("halfspace needs fields n and c", p)
        N.append(_vec3(h["n"], f"{p}.n"))
        c.append(_number(h["c"], f"{p}.c"))
    return np.array(N), np.array(c)


def _params(doc, path):
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ParseError("expected an object", f"{path}.params")
    return params


def _param(params, key, default, path):
    if key not in params:
        return default
    return _number(params[key], f"{path}.params.{key}")


def _builtin(doc, path):
    name = doc.get("name")
    if name not in BUILTINS:
        raise ParseError(f"unknown builtin {name!r}; expected one of {', '.join(BUILTINS)}",
                         f"{path}.name")
    params = _params(doc, path)
    get = lambda key, default: _param(params, key, default, path)  # noqa: E731
    for key in ("a", "b", "c", "u", "s", "radius"):
        if key in params and get(key, 1.0) <= 0:
            raise ParseError("expected a positive number", f"{path}.params.{key}")
    if name == "simplexD2":
        return fixtures.simplex_d2(get("a", 1.0), get("b", 1.0), get("c", 1.0))
    if name == "simplexS4":
        return fixtures.simplex_s4(get("u", 1.0))
    if name == "cube":
        return fixtures.cube(get("s", 1.0))
    if name == "octahedron":
        return fixtures.octahedron(get("s", 1.0))
    if name == "regularSimplex":
        return fixtures.regular_simplex()
    if name == "ball":
        return fixtures.ball(get("radius", 1.0))
    if name == "ellipsoid":
        if "axes" in params:
            return Ellipsoid(np.diag(_vec3(params["axes"], f"{path}.params.axes")))
        if "matrix" in params:
            M = params["matrix"]
            if not isinstance(M, list) or len(M) != 3:
                raise ParseError("expected a 3x3 matrix", f"{path}.params.matrix")
            return Ellipsoid(np.array([_vec3(r, f"{path}.params.matrix[{i}]")
                                       for i, r in enumerate(M)]))
        return Ellipsoid()
    # random invariant body
    from .mahler import random_invariant_body
    from .groups import UnknownGroupError, group
    try:
        G = group(params.get("group", "D2"))
    except UnknownGroupError as exc:
        raise ParseError(str(exc), f"{path}.params.group") from None
    seed = params.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ParseError("expected a nonnegative integer", f"{path}.params.seed")
    n = params.get("n_seeds")
    if n is not None and (not isinstance(n, int) or isinstance(n, bool) or n < 1):
        raise ParseError("expected a positive integer", f"{path}.params.n_seeds")
    kind = params.get("kind", "polytope")
    if kind not in ("polytope", "smooth"):
        raise ParseError("expected 'polytope' or 'smooth'", f"{path}.params.kind")
    return random_invariant_body(G, n, kind, seed)[0]


def parse_body(doc, path="$"):
    """ConvexBody from a parsed BodyFile document."""
    if not isinstance(doc, dict):
        raise ParseError("expected an object", path)
    kind = doc.get("type")
    if kind == "vpolytope":
        V = [_vec3(v, f"{path}.vertices[{i}]")
             for i, v in enumerate(_list(doc, "vertices", path))]
        K = Polytope.from_vertices(np.array(V))
    elif kind == "hpolytope":
        N, c = _halfspaces(doc, path)
        interior = _vec3(doc["interior"], f"{path}.interior") if "interior" in doc else (0, 0, 0)
        K = Polytope.from_halfspaces(N, c, interior)
    elif kind == "smooth":
        p = _number(doc.get("p", 8), f"{path}.p")
        if p < 2:
            raise ParseError("exponent must be at least 2", f"{path}.p")
        N, c = _halfspaces(doc, path)
        if np.any(c <= 0):
            raise GeometryError("smooth bodies need every offset c > 0 (o interior)")
        K = SmoothBody(N / c[:, None], p)
    elif kind == "builtin":
        K = _builtin(doc, path)
    else:
        raise ParseError("type must be vpolytope, hpolytope, smooth or builtin", f"{path}.type")
    polar = doc.get("polar", False)
    if not isinstance(polar, bool):
        raise ParseError("expected true or false", f"{path}.polar")
    return K.polar() if polar else K


def loads_body(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    return parse_body(doc)


def load_body(path):
    """Body from a file path; a bare builtin name such as ``cube`` is also accepted."""
    if path in BUILTINS:
        return parse_body({"type": "builtin", "name": path})
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read body file: {exc.strerror}") from None
    return loads_body(text)


def dumps(obj):
    """Canonical JSON: sorted keys, floats with 17 significant digits, NaN as null."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")

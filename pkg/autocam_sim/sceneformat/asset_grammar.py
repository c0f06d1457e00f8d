"""Parser and serializer for the text asset format.

The format is a small PBRT-style scene-description subset; the full
grammar is documented in ``docs/asset_grammar.md``. Example::

    Asset "car_001" "string class" "car" "string up" "z" "string forward" "x"
    Material "paint" "string type" "diffuse" "spectrum reflectance" [400 0.6 700 0.1]
    AttributeBegin
      NamedMaterial "paint"
      Translate 0 0 0.3
      Shape "trianglemesh" "point3 P" [...] "integer indices" [...]
    AttributeEnd

Transforms compose into a current transformation matrix (CTM) that is
baked into mesh vertices when a ``Shape`` is read. Every error carries
the line and column where it was detected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from autocam_sim.errors import AssetParseError
from autocam_sim.models import ClassLabel
from autocam_sim.sceneformat.assets import (
    AssetDescription,
    MaterialKind,
    MaterialSpec,
    TriangleMesh,
    axis_vector,
)
from autocam_sim.spectral import DEFAULT_GRID, Spectrum, WavelengthGrid

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<lbrack>\[)
  | (?P<rbrack>\])
    """,
    re.VERBOSE,
)

DIRECTIVES = (
    "Asset",
    "Material",
    "NamedMaterial",
    "AttributeBegin",
    "AttributeEnd",
    "Transform",
    "Translate",
    "Scale",
    "Rotate",
    "Shape",
)

_PARAM_TYPES = {"string", "float", "integer", "point3", "point", "normal", "normal3", "spectrum"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int

    @property
    def value(self) -> Any:
        if self.kind == "string":
            return self.text[1:-1]
        if self.kind == "number":
            return float(self.text)
        return self.text


@dataclass
class Param:
    type: str
    name: str
    values: list[Any]
    token: Token


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise AssetParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup or ""
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    return tokens


@dataclass
class _GraphicsState:
    ctm: np.ndarray = field(default_factory=lambda: np.eye(4))
    material: str | None = None
    material_token: Token | None = None


class _AssetParser:
    def __init__(self, text: str, grid: WavelengthGrid):
        self.tokens = tokenize(text)
        self.pos = 0
        self.grid = grid
        self.state = _GraphicsState()
        self.stack: list[tuple[_GraphicsState, Token]] = []
        self.header: dict[str, Any] | None = None
        self.materials: dict[str, MaterialSpec] = {}
        self.meshes: list[tuple[TriangleMesh, str, Token]] = []
        self.end_line = text.count("\n") + 1

    # -- token helpers -------------------------------------------------
    def _error(self, message: str, token: Token | None = None) -> AssetParseError:
        if token is None:
            token = self.tokens[self.pos] if self.pos < len(self.tokens) else None
        if token is None:
            return AssetParseError(message, self.end_line, 1)
        return AssetParseError(message, token.line, token.column)

    def _peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expected: str, what: str) -> Token:
        tok = self._peek()
        if tok is None:
            raise self._error(f"unexpected end of input, expected {what}")
        if tok.kind != expected:
            raise self._error(f"expected {what}, got {tok.text!r}", tok)
        self.pos += 1
        return tok

    def _number(self, what: str) -> float:
        tok = self._next("number", what)
        value = tok.value
        if not np.isfinite(value):
            raise self._error(f"{what} is not a finite number", tok)
        return value

    def _numbers(self, count: int, what: str) -> list[float]:
        return [self._number(what) for _ in range(count)]

    def _params(self) -> dict[str, Param]:
        params: dict[str, Param] = {}
        while (tok := self._peek()) is not None and tok.kind == "string":
            self.pos += 1
            parts = tok.value.split()
            if len(parts) != 2 or parts[0] not in _PARAM_TYPES:
                raise self._error(f"malformed parameter declaration {tok.text}", tok)
            ptype, name = parts
            if name in params:
                raise self._error(f"duplicate parameter '{name}'", tok)
            params[name] = Param(ptype, name, self._param_values(), tok)
        return params

    def _param_values(self) -> list[Any]:
        tok = self._peek()
        if tok is None:
            raise self._error("unexpected end of input, expected parameter value")
        if tok.kind in ("string", "number"):
            self.pos += 1
            if tok.kind == "number" and not np.isfinite(tok.value):
                raise self._error("parameter value is not a finite number", tok)
            return [tok.value]
        if tok.kind != "lbrack":
            raise self._error(f"expected parameter value, got {tok.text!r}", tok)
        self.pos += 1
        values: list[Any] = []
        while True:
            tok = self._peek()
            if tok is None:
                raise self._error("unterminated '[' list")
            self.pos += 1
            if tok.kind == "rbrack":
                return values
            if tok.kind not in ("string", "number"):
                raise self._error(f"unexpected {tok.text!r} inside list", tok)
            if tok.kind == "number" and not np.isfinite(tok.value):
                raise self._error("list value is not a finite number", tok)
            values.append(tok.value)

    # -- parameter access ----------------------------------------------
    def _only(self, params: dict[str, Param], allowed: set[str], directive: Token) -> None:
        for name, param in params.items():
            if name not in allowed:
                raise self._error(f"unknown parameter '{name}' for {directive.text}", param.token)

    def _string_param(self, params: dict[str, Param], name: str, default: str | None = None) -> str | None:
        param = params.get(name)
        if param is None:
            return default
        if param.type != "string" or len(param.values) != 1 or not isinstance(param.values[0], str):
            raise self._error(f"parameter '{name}' must be a single string", param.token)
        return param.values[0]

    def _float_param(self, params: dict[str, Param], name: str, default: float) -> float:
        param = params.get(name)
        if param is None:
            return default
        if param.type != "float" or len(param.values) != 1 or isinstance(param.values[0], str):
            raise self._error(f"parameter '{name}' must be a single float", param.token)
        return float(param.values[0])

    def _numeric(self, param: Param) -> np.ndarray:
        if any(isinstance(v, str) for v in param.values):
            raise self._error(f"parameter '{param.name}' must be numeric", param.token)
        return np.asarray(param.values, dtype=np.float64)

    def _spectrum_param(self, params: dict[str, Param], name: str) -> Spectrum | None:
        param = params.get(name)
        if param is None:
            return None
        values = self._numeric(param)
        if param.type == "float":
            if values.size != 1:
                raise self._error(f"parameter '{name}' must be a single float", param.token)
            if values[0] < 0:
                raise self._error(f"parameter '{name}' must be non-negative", param.token)
            return Spectrum.constant(self.grid, values[0])
        if param.type != "spectrum":
            raise self._error(f"parameter '{name}' must be a float or spectrum", param.token)
        if values.size < 2 or values.size % 2:
            raise self._error(f"spectrum '{name}' needs wavelength/value pairs", param.token)
        pairs = values.reshape(-1, 2)
        if np.any(pairs[:, 1] < 0):
            raise self._error(f"spectrum '{name}' has negative values", param.token)
        return Spectrum.from_samples(pairs[:, 0], pairs[:, 1], self.grid)

    # -- directives ----------------------------------------------------
    def parse(self) -> AssetDescription:
        while (tok := self._peek()) is not None:
            if tok.kind != "ident":
                raise self._error(f"expected a directive, got {tok.text!r}", tok)
            if tok.text not in DIRECTIVES:
                raise self._error(f"unrecognized directive '{tok.text}'", tok)
            self.pos += 1
            getattr(self, f"_do_{tok.text}")(tok)
        if self.stack:
            raise self._error("AttributeBegin without matching AttributeEnd", self.stack[-1][1])
        return self._finish()

    def _do_Asset(self, tok: Token) -> None:
        if self.header is not None:
            raise self._error("duplicate Asset statement", tok)
        asset_id = self._next("string", "asset id").value
        params = self._params()
        self._only(params, {"class", "up", "forward"}, tok)
        class_name = self._string_param(params, "class")
        if class_name is None:
            raise self._error("Asset statement needs a \"string class\" parameter", tok)
        try:
            label = ClassLabel(class_name)
        except ValueError:
            raise self._error(f"unknown class '{class_name}'", params["class"].token) from None
        up = self._string_param(params, "up", "z")
        forward = self._string_param(params, "forward", "x")
        for name, axis in (("up", up), ("forward", forward)):
            try:
                axis_vector(axis)
            except ValueError:
                raise self._error(f"unknown {name} axis '{axis}'", params[name].token) from None
        if abs(float(np.dot(axis_vector(up), axis_vector(forward)))) > 0:
            raise self._error("up and forward axes must be perpendicular", tok)
        if not asset_id:
            raise self._error("asset id must be non-empty", tok)
        self.header = {"asset_id": asset_id, "class_label": label, "up": up, "forward": forward}

    def _do_Material(self, tok: Token) -> None:
        name = self._next("string", "material name").value
        params = self._params()
        self._only(params, {"type", "reflectance", "emission", "retro_fraction", "retro_sigma"}, tok)
        if name in self.materials:
            raise self._error(f"material '{name}' defined twice", tok)
        kind_name = self._string_param(params, "type", "diffuse")
        try:
            kind = MaterialKind(kind_name)
        except ValueError:
            raise self._error(f"unknown material type '{kind_name}'", params["type"].token) from None

        reflectance = self._spectrum_param(params, "reflectance")
        emission = self._spectrum_param(params, "emission")
        if reflectance is not None and np.any(reflectance.values > 1.0):
            raise self._error("reflectance must lie in [0, 1]", params["reflectance"].token)
        if kind is MaterialKind.EMISSIVE:
            if emission is None:
                raise self._error("emissive material needs an emission parameter", tok)
        elif emission is not None:
            raise self._error("only emissive materials may declare emission", params["emission"].token)
        if kind is not MaterialKind.EMISSIVE and reflectance is None:
            reflectance = Spectrum.constant(self.grid, 0.5)

        retro_fraction = self._float_param(params, "retro_fraction", 0.0)
        retro_sigma = self._float_param(params, "retro_sigma", 5.0)
        if kind is MaterialKind.RETROREFLECTIVE:
            if not 0.0 <= retro_fraction <= 1.0:
                raise self._error("retro_fraction must lie in [0, 1]", params["retro_fraction"].token)
            if not 0.0 < retro_sigma < 90.0:
                raise self._error("retro_sigma must lie in (0, 90) degrees", params["retro_sigma"].token)
        elif "retro_fraction" in params or "retro_sigma" in params:
            raise self._error("retro parameters need a retroreflective material", tok)

        self.materials[name] = MaterialSpec(
            name=name,
            kind=kind,
            reflectance=reflectance,
            emission=emission,
            retro_fraction=retro_fraction,
            retro_sigma_deg=retro_sigma,
        )

    def _do_NamedMaterial(self, tok: Token) -> None:
        self.state.material = self._next("string", "material name").value
        self.state.material_token = tok

    def _do_AttributeBegin(self, tok: Token) -> None:
        self.stack.append(
            (_GraphicsState(self.state.ctm.copy(), self.state.material, self.state.material_token), tok)
        )

    def _do_AttributeEnd(self, tok: Token) -> None:
        if not self.stack:
            raise self._error("AttributeEnd without matching AttributeBegin", tok)
        self.state = self.stack.pop()[0]

    def _do_Transform(self, tok: Token) -> None:
        self._next("lbrack", "'['")
        values = self._numbers(16, "matrix element")
        self._next("rbrack", "']' after 16 matrix elements")
        # Column-major, translation in elements 12..14.
        m = np.asarray(values).reshape(4, 4).T
        if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0]):
            raise self._error("Transform must be affine", tok)
        if abs(np.linalg.det(m[:3, :3])) < 1e-12:
            raise self._error("Transform is singular", tok)
        self.state.ctm = m

    def _do_Translate(self, tok: Token) -> None:
        m = np.eye(4)
        m[:3, 3] = self._numbers(3, "translation")
        self.state.ctm = self.state.ctm @ m

    def _do_Scale(self, tok: Token) -> None:
        factors = self._numbers(3, "scale factor")
        if any(f == 0.0 for f in factors):
            raise self._error("scale factors must be non-zero", tok)
        self.state.ctm = self.state.ctm @ np.diag(factors + [1.0])

    def _do_Rotate(self, tok: Token) -> None:
        angle, *axis = self._numbers(4, "rotation angle/axis")
        axis = np.asarray(axis)
        norm = np.linalg.norm(axis)
        if norm == 0.0:
            raise self._error("rotation axis must be non-zero", tok)
        x, y, z = axis / norm
        theta = np.radians(angle)
        c, s = np.cos(theta), np.sin(theta)
        k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
        m = np.eye(4)
        m[:3, :3] = c * np.eye(3) + s * k + (1 - c) * np.outer([x, y, z], [x, y, z])
        self.state.ctm = self.state.ctm @ m

    def _do_Shape(self, tok: Token) -> None:
        shape_type = self._next("string", "shape type").value
        params = self._params()
        if shape_type != "trianglemesh":
            raise self._error(f"unsupported shape '{shape_type}'", tok)
        self._only(params, {"P", "indices", "N"}, tok)
        if "P" not in params or "indices" not in params:
            raise self._error("trianglemesh needs \"point3 P\" and \"integer indices\"", tok)
        if self.state.material is None:
            raise self._error("Shape without a bound material (use NamedMaterial)", tok)

        p_param, i_param = params["P"], params["indices"]
        if p_param.type not in ("point3", "point"):
            raise self._error("P must be declared point3", p_param.token)
        if i_param.type != "integer":
            raise self._error("indices must be declared integer", i_param.token)
        points = self._numeric(p_param)
        if points.size == 0 or points.size % 3:
            raise self._error("P must hold a multiple of 3 coordinates", p_param.token)
        raw = self._numeric(i_param)
        if raw.size == 0 or raw.size % 3:
            raise self._error("indices must hold a multiple of 3 entries", i_param.token)
        if np.any(raw != np.round(raw)):
            raise self._error("indices must be integers", i_param.token)
        if np.any(raw < 0) or np.any(raw >= points.size // 3):
            raise self._error(
                f"index out of range (mesh has {points.size // 3} vertices)", i_param.token
            )
        triangles = raw.astype(np.int64).reshape(-1, 3)
        if np.any(
            (triangles[:, 0] == triangles[:, 1])
            | (triangles[:, 1] == triangles[:, 2])
            | (triangles[:, 0] == triangles[:, 2])
        ):
            raise self._error("degenerate triangle (repeated vertex index)", i_param.token)

        vertices = points.reshape(-1, 3)
        ctm = self.state.ctm
        vertices = vertices @ ctm[:3, :3].T + ctm[:3, 3]
        normals = None
        if "N" in params:
            n_param = params["N"]
            if n_param.type not in ("normal", "normal3"):
                raise self._error("N must be declared normal", n_param.token)
            n = self._numeric(n_param)
            if n.size != points.size:
                raise self._error("N must have one normal per vertex", n_param.token)
            normals = n.reshape(-1, 3)
            if np.any(np.all(normals == 0, axis=1)):
                raise self._error("normals must be non-zero", n_param.token)
            if not np.array_equal(ctm, np.eye(4)):
                normals = normals @ np.linalg.inv(ctm[:3, :3])
                normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
        self.meshes.append((TriangleMesh(vertices, triangles, normals), self.state.material, self.state.material_token))

    def _finish(self) -> AssetDescription:
        if self.header is None:
            raise AssetParseError("missing Asset statement", 1, 1)
        if not self.meshes:
            raise AssetParseError("asset has no shapes", self.end_line, 1)
        for _, material, mtok in self.meshes:
            if material not in self.materials:
                raise self._error(f"unknown material reference '{material}'", mtok)
        all_vertices = np.concatenate([mesh.vertices for mesh, _, _ in self.meshes])
        return AssetDescription(
            asset_id=self.header["asset_id"],
            class_label=self.header["class_label"],
            meshes=tuple((mesh, material) for mesh, material, _ in self.meshes),
            materials=dict(self.materials),
            bbox_min=tuple(float(v) for v in all_vertices.min(axis=0)),
            bbox_max=tuple(float(v) for v in all_vertices.max(axis=0)),
            up_axis=self.header["up"],
            forward_axis=self.header["forward"],
        )


def parse_asset(text: str, grid: WavelengthGrid = DEFAULT_GRID) -> AssetDescription:
    """Parse asset text into an :class:`AssetDescription`.

    Args:
        text: Asset source.
        grid: Grid onto which material spectra are resampled.

    Returns:
        The parsed asset, vertices in asset space with transforms applied.

    Raises:
        AssetParseError: on any syntax or validation error, with line/column.
    """
    try:
        return _AssetParser(text, grid).parse()
    except AssetParseError:
        raise
    except (ValueError, TypeError, IndexError, OverflowError, np.linalg.LinAlgError) as exc:
        raise AssetParseError(f"malformed input: {exc}", 1, 1) from exc


def _fmt(values: Any) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).reshape(-1))


def _spectrum_text(s: Spectrum) -> str:
    pairs = np.stack([s.grid.centers, s.values], axis=1)
    return f"[{_fmt(pairs)}]"


def serialize_asset(asset: AssetDescription) -> str:
    """Text form of ``asset`` that parses back to an equal description.

    Meshes are written with their baked vertices, so no transforms appear
    in the output.
    """
    lines = [
        f'Asset "{asset.asset_id}" "string class" "{asset.class_label.value}" '
        f'"string up" "{asset.up_axis}" "string forward" "{asset.forward_axis}"'
    ]
    for name in sorted(asset.materials):
        m = asset.materials[name]
        parts = [f'Material "{name}" "string type" "{m.kind.value}"']
        if m.reflectance is not None:
            parts.append(f'"spectrum reflectance" {_spectrum_text(m.reflectance)}')
        if m.emission is not None:
            parts.append(f'"spectrum emission" {_spectrum_text(m.emission)}')
        if m.kind is MaterialKind.RETROREFLECTIVE:
            parts.append(f'"float retro_fraction" {m.retro_fraction!r}')
            parts.append(f'"float retro_sigma" {m.retro_sigma_deg!r}')
        lines.append(" ".join(parts))
    for mesh, material in asset.meshes:
        lines.append("AttributeBegin")
        lines.append(f'  NamedMaterial "{material}"')
        shape = (
            f'  Shape "trianglemesh" "point3 P" [{_fmt(mesh.vertices)}] '
            f'"integer indices" [{" ".join(str(int(i)) for i in mesh.triangles.reshape(-1))}]'
        )
        if mesh.normals is not None:
            shape += f' "normal N" [{_fmt(mesh.normals)}]'
        lines.append(shape)
        lines.append("AttributeEnd")
    return "\n".join(lines) + "\n"

"""JSON, CSV and binary PGM (P5) serialisation."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .energy import FuncConfig, SetConfig
from .kernel import Ambient
from .lattice import LatticeSpec, Region


def spec_to_json(spec: LatticeSpec) -> dict:
    return {"dim": spec.dim, "h": spec.h, "extent": [list(r) for r in spec.extent],
            "s": spec.s, "offset": spec.offset}


def spec_from_json(obj: dict, s: float | None = None) -> LatticeSpec:
    s = obj.get("s", s)
    if s is None:
        raise ValueError("lattice description lacks the exponent s")
    return LatticeSpec(int(obj["dim"]), float(obj["h"]),
                       tuple(tuple(r) for r in obj["extent"]), float(s),
                       float(obj.get("offset", 0.0)))


def region_to_json(region: Region) -> dict:
    out = spec_to_json(region.spec)
    out["cells"] = [list(c) for c in region.cells]
    return out


def region_from_json(obj: dict, s: float | None = None) -> Region:
    spec = spec_from_json(obj, s)
    return Region.from_cells(spec, [tuple(c) for c in obj["cells"]])


def setconfig_to_json(E: SetConfig) -> dict:
    out = region_to_json(E.region)
    out["ambient"] = E.ambient.value
    return out


def setconfig_from_json(obj: dict, s: float | None = None) -> SetConfig:
    region = region_from_json(obj, s)
    return SetConfig.from_region(region, Ambient.parse(obj.get("ambient", "empty")))


def funcconfig_to_json(u: FuncConfig) -> dict:
    out = spec_to_json(u.spec)
    out["values"] = u.values.tolist()
    out["ambient_value"] = u.ambient_value
    return out


def funcconfig_from_json(obj: dict, s: float | None = None) -> FuncConfig:
    return FuncConfig(spec_from_json(obj, s), np.asarray(obj["values"], dtype=float),
                      float(obj.get("ambient_value", 0.0)))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def mask_to_image(spec: LatticeSpec, mask) -> np.ndarray:
    """2-D mask as an image: columns follow axis 0, rows follow axis 1 from top (high) down."""
    if spec.dim != 2:
        raise ValueError("bitmaps are only defined for 2-D lattices")
    grid = np.asarray(mask, dtype=bool).reshape(spec.shape)
    return np.where(grid.T[::-1], 255, 0).astype(np.uint8)


def write_pgm(path, spec: LatticeSpec, mask) -> Path:
    img = mask_to_image(spec, mask)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM file")
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval > 255:
        raise ValueError("only 8-bit PGM files are supported")
    pos += 1
    return np.frombuffer(data[pos:pos + width * height], dtype=np.uint8).reshape(height, width)


def image_to_mask(spec: LatticeSpec, img: np.ndarray) -> np.ndarray:
    return (img[::-1].T > 127).reshape(-1)


def write_csv(path, header: str, rows) -> str:
    text = header + "\n" + "".join(r + "\n" for r in rows)
    if path is not None:
        Path(path).write_text(text)
    return text

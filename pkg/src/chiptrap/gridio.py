"""Sampling grids and bit-exact output formats (CSV, float32 raster, PGM)."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned sampling box: lo/hi corners (m) and node counts."""

    lo: tuple
    hi: tuple
    shape: tuple

    def __post_init__(self):
        if len(self.lo) != 3 or len(self.hi) != 3 or len(self.shape) != 3:
            raise ValueError("grid spec needs 3 components per field")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("grid hi must exceed lo on every axis")
        if any(int(n) < 1 for n in self.shape):
            raise ValueError("grid shape must be >= 1 per axis")
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))

    @property
    def n_points(self):
        return int(np.prod(self.shape))

    def axes(self):
        return tuple(np.linspace(l, h, n) for l, h, n in
                     zip(self.lo, self.hi, self.shape))

    def points(self):
        """All grid nodes, row-major (x outer, z inner), (N, 3)."""
        ax, ay, az = self.axes()
        xx, yy, zz = np.meshgrid(ax, ay, az, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])

    def spacing(self):
        return tuple((h - l) / max(n - 1, 1) for l, h, n in
                     zip(self.lo, self.hi, self.shape))


@dataclass(frozen=True)
class GridDump:
    """A scalar quantity sampled on a grid, stored float32 row-major."""

    spec: GridSpec
    values: np.ndarray  # shape == spec.shape, float32
    quantity: str       # e.g. "U", "|E|", "|B|", "mask"
    unit: str           # e.g. "J", "V/m", "T", "bool"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32).reshape(self.spec.shape)
        object.__setattr__(self, "values", v)

    def write_csv(self, path):
        """x,y,z,value rows with a metadata header."""
        pts = self.spec.points()
        with open(path, "w") as f:
            f.write(f"# quantity,{self.quantity}\n")
            f.write(f"# unit,{self.unit}\n")
            for name, lo, hi, n in zip("xyz", self.spec.lo, self.spec.hi,
                                       self.spec.shape):
                f.write(f"# axis,{name},{lo!r},{hi!r},{n}\n")
            f.write("x,y,z,value\n")
            np.savetxt(f, np.column_stack([pts, self.values.ravel()]),
                       fmt="%.9g", delimiter=",")

    def write_raster(self, path):
        """Raw little-endian float32 values plus a .hdr sidecar."""
        self.values.astype("<f4").tofile(path)
        with open(str(path) + ".hdr", "w") as f:
            f.write(f"quantity {self.quantity}\nunit {self.unit}\n")
            f.write("order row-major x,y,z\ndtype float32-le\n")
            for name, lo, hi, n in zip("xyz", self.spec.lo, self.spec.hi,
                                       self.spec.shape):
                f.write(f"axis {name} {lo!r} {hi!r} {n}\n")

    @staticmethod
    def read_csv(path):
        meta = {}
        axes = {}
        with open(path) as f:
            for line in f:
                if not line.startswith("#"):
                    break
                parts = line[1:].strip().split(",")
                if parts[0] == "axis":
                    axes[parts[1]] = (float(parts[2]), float(parts[3]),
                                      int(parts[4]))
                else:
                    meta[parts[0]] = parts[1]
        data = np.loadtxt(path, delimiter=",", skiprows=5 + 1, usecols=3)
        spec = GridSpec(lo=tuple(axes[a][0] for a in "xyz"),
                        hi=tuple(axes[a][1] for a in "xyz"),
                        shape=tuple(axes[a][2] for a in "xyz"))
        return GridDump(spec=spec, values=data.reshape(spec.shape),
                        quantity=meta.get("quantity", "?"),
                        unit=meta.get("unit", "?"))

    @staticmethod
    def read_raster(path):
        meta = {}
        axes = {}
        with open(str(path) + ".hdr") as f:
            for line in f:
                parts = line.split()
                if parts[0] == "axis":
                    axes[parts[1]] = (float(parts[2]), float(parts[3]),
                                      int(parts[4]))
                elif len(parts) > 1:
                    meta[parts[0]] = parts[1]
        spec = GridSpec(lo=tuple(axes[a][0] for a in "xyz"),
                        hi=tuple(axes[a][1] for a in "xyz"),
                        shape=tuple(axes[a][2] for a in "xyz"))
        vals = np.fromfile(path, dtype="<f4").reshape(spec.shape)
        return GridDump(spec=spec, values=vals,
                        quantity=meta.get("quantity", "?"),
                        unit=meta.get("unit", "?"))


def write_pgm(frame, path, bin_size=None, frame_time=None):
    """8-bit binary PGM of a nonnegative 2D histogram; the max count maps
    to 255.  Bin size and frame time go into header comments."""
    arr = np.asarray(frame)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("frame must be a non-empty 2D array")
    if (arr < 0).any():
        raise ValueError("frame counts must be nonnegative")
    peak = arr.max()
    if peak > 0:
        img = np.round(arr * (255.0 / peak)).astype(np.uint8)
    else:
        img = np.zeros_like(arr, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(b"P5\n")
        if bin_size is not None:
            f.write(f"# bin_size_m {bin_size!r}\n".encode())
        if frame_time is not None:
            f.write(f"# frame_time_s {frame_time!r}\n".encode())
        f.write(f"{img.shape[1]} {img.shape[0]}\n255\n".encode())
        f.write(img.tobytes())


def read_pgm(path):
    """Read back an 8-bit binary PGM (comments skipped)."""
    with open(path, "rb") as f:
        data = f.read()
    tokens = []
    pos = 0
    while len(tokens) < 3:
        nl = data.index(b"\n", pos)
        line = data[pos:nl]
        pos = nl + 1
        if not line.startswith(b"#"):
            tokens.append(line)
    if tokens[0] != b"P5" or tokens[2] != b"255":
        raise ValueError("not an 8-bit binary PGM")
    w, h = map(int, tokens[1].split())
    img = np.frombuffer(data[pos:pos + w * h], dtype=np.uint8).reshape(h, w)
    return img

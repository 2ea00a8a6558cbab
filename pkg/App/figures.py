from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

MARGIN_LEFT = 56
MARGIN_RIGHT = 16
MARGIN_TOP = 32
MARGIN_BOTTOM = 44
Y_TICKS = (0.0, 0.25, 0.5, 0.75, 1.0)

BAND_COLORS = {"unobserved": "#1f4fd1", "all-positive": "#d12b1f", "alternating": "#1f9d3a"}
METHOD_COLORS = (
    "#555555", "#8c564b", "#d12b1f", "#ff7f0e", "#9467bd", "#1f9d3a", "#17becf", "#1f4fd1",
)


def _fmt(value: float) -> str:
    return f"{value:.2f}"


@dataclass(frozen=True)
class Band:
    label: str
    color: str
    xs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


@dataclass
class BandChart:
    """
    SVG chart of probability bands [lo, hi] against an integer axis; points
    with a missing (NaN) endpoint are left out of their band.
    """

    title: str
    width: int = 640
    height: int = 400
    x_label: str = "n"
    bands: List[Band] = field(default_factory=list)

    def add(self, label: str, xs, lo, hi, color: Optional[str] = None) -> None:
        self.bands.append(Band(label=label, color=color or BAND_COLORS.get(label, "#333333"),
                               xs=np.asarray(xs, dtype=float), lo=np.asarray(lo, dtype=float),
                               hi=np.asarray(hi, dtype=float)))

    def _x_range(self) -> Tuple[float, float]:
        xs = np.concatenate([band.xs for band in self.bands]) if self.bands else np.array([0.0, 1.0])
        lo, hi = float(xs.min()), float(xs.max())
        return (lo, hi) if hi > lo else (lo - 1.0, hi + 1.0)

    def _sx(self, x: float, x_range: Tuple[float, float]) -> float:
        span = self.width - MARGIN_LEFT - MARGIN_RIGHT
        return MARGIN_LEFT + (x - x_range[0]) / (x_range[1] - x_range[0]) * span

    def _sy(self, y: float) -> float:
        span = self.height - MARGIN_TOP - MARGIN_BOTTOM
        return MARGIN_TOP + (1.0 - y) * span

    def _axes(self, x_range: Tuple[float, float]) -> List[str]:
        left, right = MARGIN_LEFT, self.width - MARGIN_RIGHT
        bottom = self.height - MARGIN_BOTTOM
        parts = [
            f'<line x1="{left}" y1="{MARGIN_TOP}" x2="{left}" y2="{bottom}" stroke="black"/>',
            f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        ]
        for tick in Y_TICKS:
            y = _fmt(self._sy(tick))
            parts.append(f'<line x1="{left - 4}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>')
            parts.append(f'<text x="{left - 8}" y="{y}" font-size="11" text-anchor="end" '
                         f'dominant-baseline="middle">{tick:g}</text>')

        first, last = int(np.ceil(x_range[0])), int(np.floor(x_range[1]))
        stride = max(1, (last - first) // 10 or 1)
        for tick in range(first, last + 1, stride):
            x = _fmt(self._sx(tick, x_range))
            parts.append(f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 4}" stroke="black"/>')
            parts.append(f'<text x="{x}" y="{bottom + 16}" font-size="11" text-anchor="middle">{tick}</text>')
        parts.append(f'<text x="{_fmt((left + right) / 2)}" y="{self.height - 8}" font-size="12" '
                     f'text-anchor="middle">{escape(self.x_label)}</text>')
        return parts

    def _band(self, band: Band, x_range: Tuple[float, float]) -> List[str]:
        keep = np.isfinite(band.lo) & np.isfinite(band.hi)
        xs, lo, hi = band.xs[keep], band.lo[keep], band.hi[keep]
        if xs.size == 0:
            return []
        upper = [f"{_fmt(self._sx(x, x_range))},{_fmt(self._sy(y))}" for x, y in zip(xs, hi)]
        lower = [f"{_fmt(self._sx(x, x_range))},{_fmt(self._sy(y))}" for x, y in zip(xs[::-1], lo[::-1])]
        label = escape(band.label)
        return [
            f'<polygon points="{" ".join(upper + lower)}" fill="{band.color}" fill-opacity="0.2" '
            f'stroke="none"><title>{label}</title></polygon>',
            f'<polyline points="{" ".join(upper)}" fill="none" stroke="{band.color}" stroke-width="1.5"/>',
            f'<polyline points="{" ".join(lower)}" fill="none" stroke="{band.color}" stroke-width="1.5" '
            f'stroke-dasharray="4 2"/>',
        ]

    def _legend(self) -> List[str]:
        parts = []
        for i, band in enumerate(self.bands):
            x = self.width - MARGIN_RIGHT - 150
            y = MARGIN_TOP + 8 + 16 * i
            parts.append(f'<rect x="{x}" y="{y - 8}" width="12" height="10" fill="{band.color}" '
                         f'fill-opacity="0.5"/>')
            parts.append(f'<text x="{x + 18}" y="{y}" font-size="11">{escape(band.label)}</text>')
        return parts

    def render(self) -> str:
        x_range = self._x_range()
        body = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<text x="{self.width / 2:g}" y="18" font-size="13" text-anchor="middle">{escape(self.title)}</text>',
        ]
        body += self._axes(x_range)
        for band in self.bands:
            body += self._band(band, x_range)
        body += self._legend()
        body.append("</svg>")
        return "\n".join(body) + "\n"


@dataclass
class IntervalChart:
    """
    SVG chart of labelled intervals: one row per case, one short bar per
    method, laid out along a [0, 1] probability axis.
    """

    title: str
    methods: Sequence[str]
    width: int = 640
    height: int = 400
    rows: List[Tuple[str, Sequence[Tuple[Optional[float], Optional[float]]]]] = field(default_factory=list)

    def add(self, label: str, intervals: Sequence[Tuple[Optional[float], Optional[float]]]) -> None:
        self.rows.append((label, intervals))

    def _sx(self, p: float) -> float:
        left = MARGIN_LEFT + 64
        return left + p * (self.width - left - MARGIN_RIGHT)

    def render(self) -> str:
        row_height = max(12.0, (self.height - MARGIN_TOP - MARGIN_BOTTOM) / max(1, len(self.rows)))
        lane = row_height / (len(self.methods) + 1)
        bottom = MARGIN_TOP + row_height * len(self.rows)
        height = int(bottom + MARGIN_BOTTOM + 16)

        body = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{height}" '
            f'viewBox="0 0 {self.width} {height}">',
            f'<rect width="{self.width}" height="{height}" fill="white"/>',
            f'<text x="{self.width / 2:g}" y="18" font-size="13" text-anchor="middle">{escape(self.title)}</text>',
            f'<line x1="{_fmt(self._sx(0))}" y1="{_fmt(bottom)}" x2="{_fmt(self._sx(1))}" y2="{_fmt(bottom)}" '
            f'stroke="black"/>',
        ]
        for tick in Y_TICKS:
            x = _fmt(self._sx(tick))
            body.append(f'<line x1="{x}" y1="{MARGIN_TOP}" x2="{x}" y2="{_fmt(bottom)}" stroke="#dddddd"/>')
            body.append(f'<text x="{x}" y="{_fmt(bottom + 14)}" font-size="11" text-anchor="middle">{tick:g}</text>')

        for r, (label, intervals) in enumerate(self.rows):
            top = MARGIN_TOP + r * row_height
            body.append(f'<text x="4" y="{_fmt(top + row_height / 2)}" font-size="10" '
                        f'dominant-baseline="middle">{escape(label)}</text>')
            for m, (lo, hi) in enumerate(intervals):
                if lo is None or hi is None:
                    continue
                y = _fmt(top + lane * (m + 1))
                color = METHOD_COLORS[m % len(METHOD_COLORS)]
                x1, x2 = self._sx(lo), self._sx(hi)
                if x2 - x1 < 2.0:
                    body.append(f'<circle cx="{_fmt((x1 + x2) / 2)}" cy="{y}" r="2.5" fill="{color}"/>')
                else:
                    body.append(f'<line x1="{_fmt(x1)}" y1="{y}" x2="{_fmt(x2)}" y2="{y}" stroke="{color}" '
                                f'stroke-width="2"/>')

        for m, method in enumerate(self.methods):
            x = MARGIN_LEFT + 140 * (m % 4)
            y = bottom + 30 + 14 * (m // 4)
            body.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="10" '
                        f'fill="{METHOD_COLORS[m % len(METHOD_COLORS)]}">{escape(method)}</text>')
        body.append("</svg>")
        return "\n".join(body) + "\n"

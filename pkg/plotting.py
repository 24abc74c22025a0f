"""Energy-drift and error-vs-h charts: standalone SVG text, or PNG rendered off-screen with pygame."""
import logging
import os
os.environ.setdefault('SDL_VIDEODRIVER', 'dummy')

from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np
import pygame

logger = logging.getLogger(__name__)

COLORS = {
    'white': (255, 255, 255),
    'black': (0, 0, 0),
    'grid': (220, 220, 220),
    'axis': (100, 100, 100),
    'reference': (150, 150, 150),
}
SERIES_COLORS = [
    (30, 144, 255),
    (255, 140, 0),
    (34, 139, 34),
    (200, 30, 30),
    (148, 0, 211),
    (0, 170, 170),
    (120, 80, 40),
]

FLOOR = 1e-17

Series = Dict[str, Tuple[Sequence[float], Sequence[float]]]
Color = Tuple[int, int, int]


class Rect:
    """Pixel box of the axes area."""

    def __init__(self, left: int, top: int, width: int, height: int):
        self.left, self.top, self.width, self.height = left, top, width, height

    @property
    def right(self) -> int:
        return self.left + self.width

    @property
    def bottom(self) -> int:
        return self.top + self.height

    @property
    def centerx(self) -> int:
        return self.left + self.width // 2

    @property
    def centery(self) -> int:
        return self.top + self.height // 2


class Chart:
    """A single axes box with optional log scaling on either axis.

    Subclasses supply the drawing primitives; scaling, ticks and legend layout live here.
    """

    def __init__(self, width: int = 900, height: int = 600, log_x: bool = False, log_y: bool = True,
                 title: str = "", x_label: str = "", y_label: str = ""):
        self.width, self.height = width, height
        self.box = Rect(90, 50, width - 300, height - 120)
        self.log_x, self.log_y = log_x, log_y
        self.title, self.x_label, self.y_label = title, x_label, y_label
        self.limits: Optional[Tuple[float, float, float, float]] = None
        self.legend: List[Tuple[str, Color]] = []

    # drawing primitives
    def line(self, color: Color, points: Sequence[Tuple[int, int]], width: int = 1):
        raise NotImplementedError

    def circle(self, color: Color, center: Tuple[int, int], radius: int):
        raise NotImplementedError

    def rect(self, color: Color, box: Rect, width: int):
        raise NotImplementedError

    def text(self, label: str, x: int, y: int, size: str = 'small', anchor: str = 'start', rotate: bool = False):
        raise NotImplementedError

    def write(self, path: str):
        raise NotImplementedError

    def _transform(self, values, log: bool) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return np.log10(np.maximum(values, FLOOR)) if log else values

    def fit(self, series: Series):
        xs = np.concatenate([self._transform(x, self.log_x) for x, _ in series.values()])
        ys = np.concatenate([self._transform(y, self.log_y) for _, y in series.values()])
        finite_x, finite_y = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
        x0, x1 = (finite_x.min(), finite_x.max()) if finite_x.size else (0.0, 1.0)
        y0, y1 = (finite_y.min(), finite_y.max()) if finite_y.size else (0.0, 1.0)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        if self.log_y:
            y0, y1 = np.floor(y0), np.ceil(y1)
        self.limits = (x0, x1, y0, y1)

    def to_pixel(self, x: float, y: float) -> Tuple[int, int]:
        x0, x1, y0, y1 = self.limits
        px = self.box.left + (x - x0) / (x1 - x0) * self.box.width
        py = self.box.bottom - (y - y0) / (y1 - y0) * self.box.height
        return int(round(px)), int(round(py))

    def draw_axes(self):
        x0, x1, y0, y1 = self.limits
        for k in range(6):
            y = y0 + (y1 - y0) * k / 5
            left, right = self.to_pixel(x0, y), self.to_pixel(x1, y)
            self.line(COLORS['grid'], [left, right])
            label = f"1e{y:.0f}" if self.log_y else f"{y:.3g}"
            self.text(label, self.box.left - 6, left[1] + 5, anchor='end')
        for k in range(6):
            x = x0 + (x1 - x0) * k / 5
            bottom = self.to_pixel(x, y0)
            label = f"{10 ** x:.3g}" if self.log_x else f"{x:.3g}"
            self.text(label, bottom[0], self.box.bottom + 18, anchor='middle')
        self.rect(COLORS['axis'], self.box, 2)

        self.text(self.title, self.box.left, 30, size='large')
        self.text(self.x_label, self.box.centerx, self.box.bottom + 42, anchor='middle')
        self.text(self.y_label, 25, self.box.centery, anchor='middle', rotate=True)

    def plot(self, x, y, color: Color, label: str, markers: bool = False, width: int = 2):
        tx, ty = self._transform(x, self.log_x), self._transform(y, self.log_y)
        mask = np.isfinite(tx) & np.isfinite(ty)
        points = [self.to_pixel(a, b) for a, b in zip(tx[mask], ty[mask])]
        if len(points) >= 2:
            self.line(color, points, width)
        if markers:
            for point in points:
                self.circle(color, point, 4)
        self.legend.append((label, color))

    def draw_legend(self):
        x, y = self.box.right + 20, self.box.top
        for label, color in self.legend:
            self.line(color, [(x, y + 7), (x + 25, y + 7)], 3)
            self.text(label, x + 32, y + 12)
            y += 22

    def save(self, path: str):
        self.draw_legend()
        self.write(path)
        logger.info("wrote %s", path)


class PygameChart(Chart):
    """Raster chart on an off-screen pygame surface, saved as PNG."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        pygame.font.init()
        self.surface = pygame.Surface((self.width, self.height))
        self.surface.fill(COLORS['white'])
        self.fonts = {'large': pygame.font.Font(None, 24), 'small': pygame.font.Font(None, 18)}

    def line(self, color, points, width=1):
        pygame.draw.lines(self.surface, color, False, points, width)

    def circle(self, color, center, radius):
        pygame.draw.circle(self.surface, color, center, radius)

    def rect(self, color, box, width):
        pygame.draw.rect(self.surface, color, pygame.Rect(box.left, box.top, box.width, box.height), width)

    def text(self, label, x, y, size='small', anchor='start', rotate=False):
        rendered = self.fonts[size].render(label, True, COLORS['black'])
        if rotate:
            rendered = pygame.transform.rotate(rendered, 90)
        w, h = rendered.get_width(), rendered.get_height()
        left = {'start': x, 'middle': x - w // 2, 'end': x - w}[anchor]
        top = y - h // 2 if rotate else y - h + 4
        self.surface.blit(rendered, (left, top))

    def write(self, path):
        pygame.image.save(self.surface, path)


def _svg_color(color: Color) -> str:
    return "rgb({},{},{})".format(*color)


class SvgChart(Chart):
    """Vector chart written as a standalone SVG document."""

    FONT_SIZES = {'large': 18, 'small': 13}

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.elements: List[str] = [
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="{_svg_color(COLORS["white"])}"/>'
        ]

    def line(self, color, points, width=1):
        coordinates = " ".join(f"{x},{y}" for x, y in points)
        self.elements.append(f'<polyline points="{coordinates}" fill="none" stroke="{_svg_color(color)}" '
                             f'stroke-width="{width}"/>')

    def circle(self, color, center, radius):
        self.elements.append(f'<circle cx="{center[0]}" cy="{center[1]}" r="{radius}" fill="{_svg_color(color)}"/>')

    def rect(self, color, box, width):
        self.elements.append(f'<rect x="{box.left}" y="{box.top}" width="{box.width}" height="{box.height}" '
                             f'fill="none" stroke="{_svg_color(color)}" stroke-width="{width}"/>')

    def text(self, label, x, y, size='small', anchor='start', rotate=False):
        transform = f' transform="rotate(-90 {x} {y})"' if rotate else ""
        self.elements.append(f'<text x="{x}" y="{y}" font-family="sans-serif" font-size="{self.FONT_SIZES[size]}" '
                             f'text-anchor="{anchor}"{transform}>{escape(label)}</text>')

    def to_svg(self) -> str:
        header = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                  f'viewBox="0 0 {self.width} {self.height}">')
        return "\n".join(['<?xml version="1.0" encoding="UTF-8"?>', header, *self.elements, "</svg>", ""])

    def write(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            f.write(self.to_svg())


def make_chart(path: str, **kwargs) -> Chart:
    """SVG for a .svg path, otherwise a pygame raster."""
    return SvgChart(**kwargs) if path.lower().endswith(".svg") else PygameChart(**kwargs)


def render_energy_drift(series: Series, path: str, title: str = "Relative energy drift") -> str:
    """Relative drift |E(t_j) - E(0)| / E(0) against t_j on a log axis."""
    chart = make_chart(path, log_y=True, title=title, x_label="t", y_label="|E(t) - E(0)| / E(0)")
    chart.fit(series)
    chart.draw_axes()
    for k, (label, (times, drift)) in enumerate(series.items()):
        chart.plot(times, drift, SERIES_COLORS[k % len(SERIES_COLORS)], label)
    chart.save(path)
    return path


def render_convergence(series: Series, path: str, slopes: Sequence[int] = (),
                       title: str = "Error against mesh size") -> str:
    """Log-log errors against h with grey reference slopes anchored at the coarsest point."""
    chart = make_chart(path, log_x=True, log_y=True, title=title, x_label="h_t", y_label="error")
    references: Series = {}
    first = next(iter(series.values()), None)
    if first is not None and len(first[0]) >= 2:
        h = np.asarray(first[0], dtype=float)
        anchor = float(np.max([np.asarray(e, dtype=float)[0] for _, e in series.values()]))
        for slope in slopes:
            references[f"slope {slope}"] = (h, anchor * (h / h[0]) ** slope)
    chart.fit({**series, **references})
    chart.draw_axes()
    for label, (h, values) in references.items():
        chart.plot(h, values, COLORS['reference'], label, width=1)
    for k, (label, (h, errors)) in enumerate(series.items()):
        chart.plot(h, errors, SERIES_COLORS[k % len(SERIES_COLORS)], label, markers=True)
    chart.save(path)
    return path

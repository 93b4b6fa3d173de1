"""
This module contains the class that stores the cross-section results and renders them: one CSV per model and a
single SVG drawing. Both outputs are deterministic, and the drawing is made from exactly the data in the CSV files so
that re-plotting from the CSV files reproduces it byte for byte.
"""

__all__ = ['SectionSolution']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import glob
import logging
import os
from dataclasses import dataclass, field
from typing import Optional

import matplotlib
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from LFIC_sim.cross_section import Section, SectionPlane
from LFIC_sim.custom_exceptions import OutputExistsError
from LFIC_sim.version import __version__


logger = logging.getLogger(__name__)

CSV_COLUMNS = ['model', 'angle', 'boundary-x', 'boundary-y']
SECTION_PREFIX = 'section_'
MARKER_FILE = 'markers.csv'
FIGURE_FILE = 'section.svg'

# drawing order and colors, the larger sets first
_STYLE = {
    'ns': ('tab:green', 'NS'),
    'npa-2': ('tab:blue', 'quantum (level 2)'),
    'npa-1+AB': ('tab:cyan', 'quantum (level 1+AB)'),
    'npa-1': ('tab:purple', 'quantum (level 1)'),
    'lfic': ('tab:orange', 'LFIC'),
    'lf': ('tab:red', 'LF'),
    'lhv': ('tab:gray', 'LHV'),
}


def _check_target(path: str, force: bool) -> None:
    if os.path.exists(path) and not force:
        raise OutputExistsError(path)


@dataclass
class SectionSolution:
    """
    Boundary points per model (an empty array marks an empty section) and the labeled marker points, all in plot
    coordinates. header holds the run parameters echoed into every output file.
    """
    boundaries: dict = field(default_factory=dict)
    markers: dict = field(default_factory=dict)
    angles: dict = field(default_factory=dict)
    header: dict = field(default_factory=dict)

    @classmethod
    def from_sections(cls, plane: SectionPlane, sections, header: Optional[dict] = None) -> "SectionSolution":
        if not sections:
            raise ValueError("At least one section is needed.")
        sol = cls(header=dict(header or {}))
        for section in sections:
            sol.add(section)
        sol.markers = {name: np.asarray(xy, dtype=float) for name, xy in plane.markers().items()}
        return sol

    def add(self, section: Section) -> None:
        if section.empty:
            self.boundaries[section.model] = np.empty((0, 2))
            self.angles[section.model] = np.empty(0)
        else:
            self.boundaries[section.model] = np.asarray(section.boundary, dtype=float)
            self.angles[section.model] = np.asarray(section.angles, dtype=float)

    def is_empty(self, model: str) -> bool:
        return len(self.boundaries[model]) == 0

    def ordered_models(self) -> list:
        known = [m for m in _STYLE if m in self.boundaries]
        return known + sorted(m for m in self.boundaries if m not in _STYLE)

    def to_frame(self, model: str) -> pd.DataFrame:
        """CSV rows of one model; an empty section is a single row without angle and coordinates."""
        points = self.boundaries[model]
        if len(points) == 0:
            return pd.DataFrame({'model': [model], 'angle': [np.nan], 'boundary-x': [np.nan],
                                 'boundary-y': [np.nan]}, columns=CSV_COLUMNS)
        return pd.DataFrame({'model': model, 'angle': self.angles[model], 'boundary-x': points[:, 0],
                             'boundary-y': points[:, 1]}, columns=CSV_COLUMNS)

    def _header_lines(self) -> list:
        lines = [f"# LFIC_sim {__version__} cross section"]
        lines += [f"# {key} = {value}" for key, value in sorted(self.header.items())]
        return lines

    def to_csv(self, out_dir: str, force: bool = False) -> list:
        """
        Writes section_<model>.csv for every model and markers.csv.
        :return: (list) written paths
        """
        os.makedirs(out_dir, exist_ok=True)
        written = []
        for model in self.ordered_models():
            path = os.path.join(out_dir, f"{SECTION_PREFIX}{model}.csv")
            _check_target(path, force)
            with open(path, 'w', newline='') as file:
                file.write('\n'.join(self._header_lines()) + '\n')
                self.to_frame(model).to_csv(file, index=False, float_format='%.17g', lineterminator='\n')
            written.append(path)
        path = os.path.join(out_dir, MARKER_FILE)
        _check_target(path, force)
        markers = pd.DataFrame({'name': list(self.markers), 'x': [float(v[0]) for v in self.markers.values()],
                                'y': [float(v[1]) for v in self.markers.values()]})
        with open(path, 'w', newline='') as file:
            file.write('\n'.join(self._header_lines()) + '\n')
            markers.to_csv(file, index=False, float_format='%.17g', lineterminator='\n')
        written.append(path)
        logger.info(f"wrote {len(written)} CSV files to {out_dir}")
        return written

    @classmethod
    def from_csv(cls, out_dir: str) -> "SectionSolution":
        """Reads the files written by to_csv. Header comments are not restored."""
        sol = cls()
        for path in sorted(glob.glob(os.path.join(out_dir, f"{SECTION_PREFIX}*.csv"))):
            df = pd.read_csv(path, comment='#')
            model = str(df['model'].iloc[0])
            valid = df.dropna(subset=['angle'])
            sol.boundaries[model] = valid[['boundary-x', 'boundary-y']].to_numpy(dtype=float).reshape(-1, 2)
            sol.angles[model] = valid['angle'].to_numpy(dtype=float)
        markers = pd.read_csv(os.path.join(out_dir, MARKER_FILE), comment='#')
        sol.markers = {str(n): np.array([x, y]) for n, x, y in zip(markers['name'], markers['x'], markers['y'])}
        return sol

    def plot(self):
        """
        Draws every section as a closed polyline and labels the markers. Empty sections only get a legend entry.
        :return: (plt.figure) figure object
        """
        fig = plt.figure(figsize=(6, 6))
        ax = fig.add_subplot()
        for model in self.ordered_models():
            color, label = _STYLE.get(model, ('black', model))
            points = self.boundaries[model]
            if len(points) == 0:
                ax.plot([], [], linestyle='none', marker='x', color=color, label=f"{label}: empty")
                continue
            closed = np.vstack([points, points[:1]])
            ax.fill(closed[:, 0], closed[:, 1], color=color, alpha=0.25, linewidth=0)
            ax.plot(closed[:, 0], closed[:, 1], color=color, linewidth=1.0, label=label)
        for name, (x, y) in self.markers.items():
            ax.plot([x], [y], marker='o', color='black', markersize=3)
            ax.annotate(name, (x, y), textcoords='offset points', xytext=(4, 4))
        ax.set_aspect('equal')
        ax.set_xlabel('plane coordinate 1')
        ax.set_ylabel('plane coordinate 2')
        ax.legend(loc='best', fontsize='small')
        return fig

    def render_svg(self, path: str, force: bool = False) -> str:
        """
        Saves the drawing as SVG. The id hash salt is fixed and the date metadata dropped so the bytes are
        reproducible.
        """
        _check_target(path, force)
        with matplotlib.rc_context({'svg.hashsalt': 'LFIC_sim', 'svg.fonttype': 'path'}):
            fig = self.plot()
            fig.savefig(path, format='svg', metadata={'Date': None})
        plt.close(fig)
        logger.info(f"wrote {path}")
        return path

    def write(self, out_dir: str, force: bool = False) -> list:
        """CSV files and the drawing."""
        written = self.to_csv(out_dir, force)
        written.append(self.render_svg(os.path.join(out_dir, FIGURE_FILE), force))
        return written

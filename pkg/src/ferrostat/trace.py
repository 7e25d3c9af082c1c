"""Time-ordered multivariate signals produced by simulation."""

from __future__ import annotations

import io

import numpy as np

from .errors import DomainError
from .model import STATE_ORDER

CSV_HEADER = "t,Fe,TfR1,FPN1a,Ft,IRP,dFe,dTfR1,dFPN1a,dFt,dIRP,TfSat"


class Trace:
    """Immutable sampled trajectory.

    Holds, per sample: the state vector, the derivative vector (filled from
    the model right-hand side, not from numerical differencing) and the input
    value.  Sample times are strictly increasing and include both the uniform
    reporting grid and every internally accepted integrator step;
    ``on_grid`` marks the reporting-grid subset.

    Values between samples are defined by linear interpolation.  Instances
    are safe to share between threads.
    """

    __slots__ = ("times", "states", "derivs", "tf_sat", "on_grid", "_index")

    def __init__(self, times, states, derivs, tf_sat, on_grid=None):
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        derivs = np.asarray(derivs, dtype=float)
        tf_sat = np.asarray(tf_sat, dtype=float)
        if times.ndim != 1 or len(times) == 0:
            raise DomainError("trace needs at least one sample")
        if np.any(np.diff(times) <= 0.0):
            raise DomainError("trace times must be strictly increasing")
        if states.shape != (len(times), 5) or derivs.shape != states.shape:
            raise DomainError("state/derivative arrays must be (n_samples, 5)")
        if on_grid is None:
            on_grid = np.ones(len(times), dtype=bool)
        on_grid = np.asarray(on_grid, dtype=bool)
        for arr in (times, states, derivs, tf_sat, on_grid):
            arr.setflags(write=False)
        self.times = times
        self.states = states
        self.derivs = derivs
        self.tf_sat = tf_sat
        self.on_grid = on_grid
        self._index = {name: i for i, name in enumerate(STATE_ORDER)}

    def __len__(self):
        return len(self.times)

    @property
    def t_start(self):
        return float(self.times[0])

    @property
    def t_end(self):
        return float(self.times[-1])

    @property
    def variables(self):
        return STATE_ORDER

    def column(self, name: str) -> np.ndarray:
        """Sampled values of a state variable."""
        return self.states[:, self._index[name]]

    def deriv_column(self, name: str) -> np.ndarray:
        """Sampled derivative of a state variable."""
        return self.derivs[:, self._index[name]]

    def has_variable(self, name: str) -> bool:
        return name in self._index

    def value_at(self, name: str, t: float) -> float:
        """Linearly interpolated value of a variable at absolute time ``t``."""
        self._check_domain(t)
        return float(np.interp(t, self.times, self.column(name)))

    def deriv_at(self, name: str, t: float) -> float:
        self._check_domain(t)
        return float(np.interp(t, self.times, self.deriv_column(name)))

    def _check_domain(self, t: float):
        if not (self.t_start <= t <= self.t_end):
            raise DomainError(
                f"time {t} outside trace domain [{self.t_start}, {self.t_end}]"
            )

    def grid_subset(self) -> "Trace":
        """The trace restricted to reporting-grid samples."""
        m = self.on_grid
        return Trace(self.times[m], self.states[m], self.derivs[m], self.tf_sat[m])

    def to_csv(self) -> str:
        """Reporting-grid samples in CSV form, >= 12 significant digits."""
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for i in np.flatnonzero(self.on_grid):
            row = [self.times[i], *self.states[i], *self.derivs[i], self.tf_sat[i]]
            buf.write(",".join(f"{v:.12e}" for v in row) + "\n")
        return buf.getvalue()


class GenericTrace:
    """A sampled multivariate signal over arbitrary variable names.

    Provides the same read interface as :class:`Trace` (times, columns,
    derivative columns, interpolation), so formulas can be monitored against
    signals that do not come from the built-in model.  Derivatives default
    to zero unless supplied.
    """

    __slots__ = ("times", "_cols", "_ders")

    def __init__(self, times, columns: dict, derivs: dict | None = None):
        self.times = np.asarray(times, dtype=float)
        if self.times.ndim != 1 or len(self.times) == 0:
            raise DomainError("trace needs at least one sample")
        if np.any(np.diff(self.times) <= 0.0):
            raise DomainError("trace times must be strictly increasing")
        self._cols = {}
        self._ders = {}
        for name, values in columns.items():
            col = np.asarray(values, dtype=float)
            if col.shape != self.times.shape:
                raise DomainError(f"column {name!r} length mismatch")
            self._cols[name] = col
            self._ders[name] = np.zeros_like(col)
        for name, values in (derivs or {}).items():
            der = np.asarray(values, dtype=float)
            if der.shape != self.times.shape:
                raise DomainError(f"derivative column {name!r} length mismatch")
            self._ders[name] = der

    def __len__(self):
        return len(self.times)

    @property
    def t_start(self):
        return float(self.times[0])

    @property
    def t_end(self):
        return float(self.times[-1])

    @property
    def variables(self):
        return tuple(self._cols)

    def has_variable(self, name):
        return name in self._cols

    def column(self, name):
        return self._cols[name]

    def deriv_column(self, name):
        return self._ders[name]

    def value_at(self, name, t):
        if not (self.t_start <= t <= self.t_end):
            raise DomainError(
                f"time {t} outside trace domain [{self.t_start}, {self.t_end}]"
            )
        return float(np.interp(t, self.times, self._cols[name]))


def trace_from_samples(times, columns: dict, derivs: dict | None = None) -> GenericTrace:
    """Build a monitorable signal from per-variable sample arrays."""
    return GenericTrace(times, columns, derivs)

"""Data-fidelity check: mark geometry must be invariant up to one global
per-axis affine transform, unless a declared transform explains it.

Only rendered geometry is observable in an SVG, so the check is a
necessary machine-checkable condition, not a proof of data integrity;
reviewers still make the final call. Anchor points are the corners of
each mark's bounding box, compared after a least-squares per-axis
affine fit. Mark positions that only a log rescale explains are
accepted when (and only when) the matching transform was declared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from .diffing import ChangeKind, ElementChange, diff, _match
from .errors import NoMarks
from .figmap import FigureMap
from .svgdoc import FigureDocument

# Fraction of the mark bounding-box diagonal below which geometry
# deviations are considered invisible.
FIDELITY_TOLERANCE_FRACTION = 0.005

KNOWN_TRANSFORMS = ("log-scale-x", "log-scale-y", "unit-conversion")


class FidelityStatus(Enum):
    PASS = "pass"
    VIOLATION = "violation"
    NEEDS_DECLARED_TRANSFORM = "needs-declared-transform"


@dataclass(frozen=True)
class AffineFit:
    scale_x: float
    scale_y: float
    translate_x: float
    translate_y: float

    @property
    def is_identity(self) -> bool:
        return (
            abs(self.scale_x - 1.0) < 1e-9
            and abs(self.scale_y - 1.0) < 1e-9
            and abs(self.translate_x) < 1e-9
            and abs(self.translate_y) < 1e-9
        )

    def to_json(self) -> dict:
        return {
            "scale_x": self.scale_x,
            "scale_y": self.scale_y,
            "translate_x": self.translate_x,
            "translate_y": self.translate_y,
        }


@dataclass
class FidelityReport:
    status: FidelityStatus
    mark_changes: list[ElementChange] = field(default_factory=list)
    fitted_transform: AffineFit | None = None
    residual: float = 0.0
    declared_transforms: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "mark_changes": [c.to_json() for c in self.mark_changes],
            "fitted_transform": None
            if self.fitted_transform is None
            else self.fitted_transform.to_json(),
            "residual": self.residual,
            "declared_transforms": list(self.declared_transforms),
        }


def parse_declarations(declared) -> tuple[list[str], list[str]]:
    """Split declarations into recognized and unrecognized."""
    recognized, unrecognized = [], []
    for decl in declared:
        name = decl.split(":", 1)[0].strip()
        if name in KNOWN_TRANSFORMS:
            recognized.append(decl.strip())
        else:
            unrecognized.append(decl)
    return recognized, unrecognized


def check_data_fidelity(
    old: FigureDocument,
    new: FigureDocument,
    figure_map: FigureMap,
    declared=(),
) -> FidelityReport:
    old_marks = _marks(old, figure_map)
    new_marks = _marks(new, figure_map)
    if not old_marks and not new_marks:
        raise NoMarks("no marks-role elements in either version; check the figure map")

    mark_changes = [
        c
        for c in diff(old, new, figure_map)
        if c.role.first_level == "marks"
        and (c.kind is not ChangeKind.MODIFY or "geometry" in c.facets)
    ]
    recognized, _unrecognized = parse_declarations(declared)

    added_or_removed = [c for c in mark_changes if c.kind is not ChangeKind.MODIFY]
    if len(old_marks) != len(new_marks) or added_or_removed:
        return FidelityReport(
            status=FidelityStatus.VIOLATION,
            mark_changes=mark_changes,
            declared_transforms=[],
        )

    pairs = _match_marks(old, new, figure_map)
    old_pts, new_pts = _anchor_points(pairs)
    tol = _tolerance(old_marks, new_marks, old, new)

    if len(old_pts) == 0:
        return FidelityReport(
            status=FidelityStatus.PASS,
            mark_changes=mark_changes,
            fitted_transform=AffineFit(1.0, 1.0, 0.0, 0.0),
            residual=0.0,
        )

    fit, residuals = _affine_fit(old_pts, new_pts)
    residual = float(np.max(np.abs(residuals)))
    if residual <= tol:
        honored = [
            d for d in recognized if d.startswith("unit-conversion") and not fit.is_identity
        ]
        return FidelityReport(
            status=FidelityStatus.PASS,
            mark_changes=mark_changes,
            fitted_transform=fit,
            residual=residual,
            declared_transforms=honored,
        )

    for axis, decl_name in ((1, "log-scale-y"), (0, "log-scale-x")):
        log_residual, log_fit = _log_axis_fit(old_pts, new_pts, axis)
        if log_residual is not None and log_residual <= tol:
            if decl_name in recognized:
                return FidelityReport(
                    status=FidelityStatus.PASS,
                    mark_changes=mark_changes,
                    fitted_transform=log_fit,
                    residual=log_residual,
                    declared_transforms=[decl_name],
                )
            return FidelityReport(
                status=FidelityStatus.NEEDS_DECLARED_TRANSFORM,
                mark_changes=mark_changes,
                fitted_transform=log_fit,
                residual=log_residual,
                declared_transforms=[],
            )

    # Keep only the offending modifications in front so the report names them.
    per_pair = np.max(np.abs(residuals).reshape(-1, 2, 2), axis=(1, 2))
    offenders = {
        pairs[k][0].path
        for k in np.nonzero(per_pair > tol)[0]
    }
    mark_changes.sort(key=lambda c: (c.old_ref not in offenders, c.old_ref or c.new_ref))
    return FidelityReport(
        status=FidelityStatus.VIOLATION,
        mark_changes=mark_changes,
        fitted_transform=fit,
        residual=residual,
        declared_transforms=[],
    )


def _marks(doc: FigureDocument, figure_map: FigureMap):
    return [
        el for el in doc.iter_elements() if figure_map.resolve(el).first_level == "marks"
    ]


def _match_marks(old, new, figure_map):
    old_roles = {el.path: figure_map.resolve(el) for el in old.iter_elements()}
    new_roles = {el.path: figure_map.resolve(el) for el in new.iter_elements()}
    pairs = _match(
        list(old.iter_elements()), list(new.iter_elements()), old_roles, new_roles
    )
    return [
        (o, n)
        for o, n in pairs
        if old_roles[o.path].first_level == "marks"
        and o.geometry is not None
        and o.geometry.bbox is not None
        and n.geometry is not None
        and n.geometry.bbox is not None
    ]


def _anchor_points(pairs):
    old_pts, new_pts = [], []
    for o, n in pairs:
        old_pts.extend(o.geometry.bbox.corners)
        new_pts.extend(n.geometry.bbox.corners)
    return np.asarray(old_pts, dtype=float), np.asarray(new_pts, dtype=float)


def _tolerance(old_marks, new_marks, old, new) -> float:
    boxes = [
        el.geometry.bbox
        for el in old_marks + new_marks
        if el.geometry is not None and el.geometry.bbox is not None
    ]
    if boxes:
        box = boxes[0]
        for b in boxes[1:]:
            box = box.union(b)
        diagonal = box.diagonal
    else:
        diagonal = math.hypot(new.width, new.height)
    return FIDELITY_TOLERANCE_FRACTION * diagonal


def _axis_affine(xo: np.ndarray, xn: np.ndarray) -> tuple[float, float]:
    var = float(np.sum((xo - xo.mean()) ** 2))
    if var < 1e-12:
        return 1.0, float(np.mean(xn - xo))
    cov = float(np.sum((xo - xo.mean()) * (xn - xn.mean())))
    scale = cov / var
    offset = float(xn.mean() - scale * xo.mean())
    return scale, offset


def _affine_fit(old_pts: np.ndarray, new_pts: np.ndarray):
    sx, tx = _axis_affine(old_pts[:, 0], new_pts[:, 0])
    sy, ty = _axis_affine(old_pts[:, 1], new_pts[:, 1])
    fit = AffineFit(scale_x=sx, scale_y=sy, translate_x=tx, translate_y=ty)
    predicted = np.column_stack([sx * old_pts[:, 0] + tx, sy * old_pts[:, 1] + ty])
    return fit, predicted - new_pts


def _log_axis_fit(old_pts, new_pts, axis: int):
    """Best fit new = p*log(+-(old - q)) + r on one axis, affine on the other.

    Both orientations are tried because a screen axis may run opposite
    to the data axis (SVG y grows downward).
    """
    xo, xn = old_pts[:, axis], new_pts[:, axis]
    if len(np.unique(np.round(xo, 12))) < 3:
        return None, None
    lo, hi = float(xo.min()), float(xo.max())

    def residual_for(s: float, sign: int) -> float:
        q = lo - math.exp(s) if sign > 0 else hi + math.exp(s)
        z = np.log(sign * (xo - q))
        p, r = _axis_affine(z, xn)
        return float(np.max(np.abs(p * z + r - xn)))

    log_res = math.inf
    for sign in (1, -1):
        best = minimize_scalar(
            lambda s: residual_for(s, sign),
            bounds=(-12.0, 12.0),
            method="bounded",
            options={"xatol": 1e-10},
        )
        log_res = min(log_res, float(best.fun))

    other = 1 - axis
    so, to = _axis_affine(old_pts[:, other], new_pts[:, other])
    other_res = float(
        np.max(np.abs(so * old_pts[:, other] + to - new_pts[:, other]))
    )
    combined = max(log_res, other_res)
    fit = AffineFit(
        scale_x=so if axis == 1 else 1.0,
        scale_y=so if axis == 0 else 1.0,
        translate_x=to if axis == 1 else 0.0,
        translate_y=to if axis == 0 else 0.0,
    )
    return combined, fit

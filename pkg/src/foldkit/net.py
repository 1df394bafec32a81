"""Planar polyhedral nets: validation, rigid folding and closure checks.

Hinges are zero-width fold lines.  A hinge angle is the interior dihedral
between the two faces (pi = coplanar); every crease folds toward the same
side of the sheet (+z of the root face).
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from .design import POLYHEDRA, polyhedron_targets
from .model import BandSpec, FoldSolution, HingeSpec, JointConfig, SolverError, solve_equilibrium

LENGTH_TOL = 1e-9  # m


@dataclass(frozen=True)
class EdgeRef:
    face: str
    i: int
    j: int


@dataclass(frozen=True)
class Hinge:
    face_a: str
    face_b: str
    edge_a: Tuple[int, int]
    edge_b: Tuple[int, int]
    joint: Optional[JointConfig] = None
    target_angle: Optional[float] = None
    id: str = ""


@dataclass(frozen=True)
class MatingPair:
    a: EdgeRef
    b: EdgeRef


@dataclass(frozen=True)
class NetSpec:
    faces: Mapping[str, Tuple[Tuple[float, float], ...]]
    hinges: Tuple[Hinge, ...]
    mating: Tuple[MatingPair, ...]
    root_face: str

    def __post_init__(self):
        faces = {str(k): tuple((float(x), float(y)) for x, y in v) for k, v in dict(self.faces).items()}
        object.__setattr__(self, "faces", faces)
        hinges = tuple(
            h if h.id else Hinge(h.face_a, h.face_b, tuple(h.edge_a), tuple(h.edge_b), h.joint, h.target_angle, f"h{k}")
            for k, h in enumerate(self.hinges)
        )
        object.__setattr__(self, "hinges", hinges)
        object.__setattr__(self, "mating", tuple(self.mating))

    @property
    def hinge_ids(self) -> List[str]:
        return [h.id for h in self.hinges]

    def points(self, face: str) -> np.ndarray:
        return np.array(self.faces[face], dtype=float)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    faces: Tuple[str, ...] = ()

    def __str__(self):
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True)
class FoldedNet:
    vertices: Dict[str, np.ndarray]
    angles: Dict[str, float]
    closure_error: float
    solutions: Optional[Dict[str, FoldSolution]] = None

    @property
    def is_flat(self) -> bool:
        return all(a == math.pi for a in self.angles.values())


class InvalidNetError(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("invalid net:\n" + "\n".join(f"  {v}" for v in self.violations))


class MissingAngleError(KeyError):
    pass


class HingeSolveError(SolverError):
    def __init__(self, hinge_id: str, cause: Exception):
        super().__init__(f"hinge {hinge_id}: {cause}")
        self.hinge_id = hinge_id


# -- validation -----------------------------------------------------------------


def _is_polygon_edge(n: int, i: int, j: int) -> bool:
    return 0 <= i < n and 0 <= j < n and (j - i) % n in (1, n - 1)


def _edge_key(face: str, i: int, j: int) -> Tuple[str, int, int]:
    return (face, min(i, j), max(i, j))


def validate_net(net: NetSpec) -> List[Violation]:
    """Every structural problem with the net; empty when it is foldable."""
    out: List[Violation] = []
    faces = net.faces
    if net.root_face not in faces:
        out.append(Violation("missing_root", f"root face {net.root_face!r} is not defined", (net.root_face,)))

    for fid, pts in faces.items():
        if len(pts) < 3:
            out.append(Violation("bad_face", f"face {fid!r} has fewer than 3 vertices", (fid,)))

    def edge_ok(face, i, j, what) -> bool:
        if face not in faces:
            out.append(Violation("dangling_reference", f"{what} refers to unknown face {face!r}", (face,)))
            return False
        if not _is_polygon_edge(len(faces[face]), i, j):
            out.append(Violation("bad_edge", f"{what}: ({i}, {j}) is not an edge of face {face!r}", (face,)))
            return False
        return True

    parent = {f: f for f in faces}

    def find(f):
        while parent[f] != f:
            parent[f] = parent[parent[f]]
            f = parent[f]
        return f

    hinge_edges = set()
    seen_ids = set()
    for h in net.hinges:
        if h.id in seen_ids:
            out.append(Violation("duplicate_id", f"hinge id {h.id!r} used twice", (h.face_a, h.face_b)))
        seen_ids.add(h.id)
        ok_a = edge_ok(h.face_a, *h.edge_a, what=f"hinge {h.id}")
        ok_b = edge_ok(h.face_b, *h.edge_b, what=f"hinge {h.id}")
        if h.face_a == h.face_b:
            out.append(Violation("self_hinge", f"hinge {h.id} joins face {h.face_a!r} to itself", (h.face_a,)))
            continue
        if not (ok_a and ok_b):
            continue
        hinge_edges.add(_edge_key(h.face_a, *h.edge_a))
        hinge_edges.add(_edge_key(h.face_b, *h.edge_b))
        pa, pb = net.points(h.face_a), net.points(h.face_b)
        la = np.linalg.norm(pa[h.edge_a[1]] - pa[h.edge_a[0]])
        lb = np.linalg.norm(pb[h.edge_b[1]] - pb[h.edge_b[0]])
        if abs(la - lb) > LENGTH_TOL:
            out.append(Violation(
                "length_mismatch",
                f"hinge {h.id}: edge lengths differ ({la * 1e3:.6g} mm on {h.face_a!r} vs "
                f"{lb * 1e3:.6g} mm on {h.face_b!r})",
                (h.face_a, h.face_b),
            ))
        ra, rb = find(h.face_a), find(h.face_b)
        if ra == rb:
            out.append(Violation(
                "cycle", f"hinge {h.id} between {h.face_a!r} and {h.face_b!r} closes a cycle",
                (h.face_a, h.face_b),
            ))
        else:
            parent[ra] = rb

    if faces:
        groups = defaultdict(list)
        for f in faces:
            groups[find(f)].append(f)
        if len(groups) > 1:
            anchor = find(net.root_face) if net.root_face in faces else None
            for root, members in groups.items():
                if root == anchor:
                    continue
                out.append(Violation(
                    "disconnected", f"faces {', '.join(map(repr, members))} are not connected to the root by hinges",
                    tuple(members),
                ))

    used = {}
    for k, m in enumerate(net.mating):
        for side in (m.a, m.b):
            if not edge_ok(side.face, side.i, side.j, what=f"mating pair {k}"):
                continue
            key = _edge_key(side.face, side.i, side.j)
            if key in hinge_edges:
                out.append(Violation("mating_on_hinge", f"mating pair {k} uses hinge edge {key}", (side.face,)))
            if key in used:
                out.append(Violation(
                    "duplicate_mating", f"edge {key} appears in mating pairs {used[key]} and {k}", (side.face,)
                ))
            else:
                used[key] = k
    return out


# -- folding --------------------------------------------------------------------


def _rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _place(child: np.ndarray, edge: Tuple[int, int], a: np.ndarray, b: np.ndarray, parent_centroid: np.ndarray):
    """Rigidly move ``child`` so its ``edge`` lands on segment a-b, on the far side from the parent."""
    side_parent = _cross2(b - a, parent_centroid - a)
    p, q = child[edge[0]], child[edge[1]]
    # already laid out in the shared frame: keep coordinates untouched
    for s, t in ((p, q), (q, p)):
        if np.allclose(s, a, atol=1e-12, rtol=0) and np.allclose(t, b, atol=1e-12, rtol=0):
            if _cross2(b - a, child.mean(axis=0) - a) * side_parent <= 0:
                return child.copy()
    best = None
    for s, t in ((p, q), (q, p)):
        src, dst = t - s, b - a
        ang = math.atan2(dst[1], dst[0]) - math.atan2(src[1], src[0])
        c, sn = math.cos(ang), math.sin(ang)
        rot = np.array([[c, -sn], [sn, c]])
        placed = (child - s) @ rot.T + a
        side = _cross2(b - a, placed.mean(axis=0) - a)
        if side * side_parent < 0:
            return placed
        if best is None:
            best = placed
    return best


def _tree(net: NetSpec):
    children = defaultdict(list)
    for h in net.hinges:
        children[h.face_a].append((h, h.face_b, h.edge_a, h.edge_b))
        children[h.face_b].append((h, h.face_a, h.edge_b, h.edge_a))
    return children


def flat_layout(net: NetSpec) -> Dict[str, np.ndarray]:
    """2D coordinates of every face in the root face's frame."""
    _require_valid(net)
    layout = {net.root_face: net.points(net.root_face)}
    children = _tree(net)
    stack = [net.root_face]
    while stack:
        f = stack.pop()
        for h, other, my_edge, other_edge in reversed(children[f]):
            if other in layout:
                continue
            pts = layout[f]
            layout[other] = _place(net.points(other), other_edge, pts[my_edge[0]], pts[my_edge[1]], pts.mean(axis=0))
            stack.append(other)
    return layout


def _require_valid(net: NetSpec) -> None:
    problems = validate_net(net)
    if problems:
        raise InvalidNetError(problems)


def fold_net(net: NetSpec, angles: Mapping[str, float]) -> FoldedNet:
    """Fold every hinge to its assigned interior angle, depth-first from the root."""
    _require_valid(net)
    applied = {}
    for hid in net.hinge_ids:
        if hid not in angles:
            raise MissingAngleError(f"no angle given for hinge {hid!r}")
        a = float(angles[hid])
        if not 0 < a <= math.pi:
            raise ValueError(f"hinge {hid}: angle must lie in (0, pi], got {a!r}")
        applied[hid] = a

    layout = flat_layout(net)
    lifted = {f: np.column_stack([p, np.zeros(len(p))]) for f, p in layout.items()}
    transforms = {net.root_face: (np.eye(3), np.zeros(3))}
    children = _tree(net)
    stack = [net.root_face]
    while stack:
        f = stack.pop()
        rot_p, off_p = transforms[f]
        for h, other, my_edge, _ in reversed(children[f]):
            if other in transforms:
                continue
            p0, p1 = lifted[f][my_edge[0]], lifted[f][my_edge[1]]
            axis = (p1 - p0) / np.linalg.norm(p1 - p0)
            sense = 1.0 if np.cross(axis, lifted[other].mean(axis=0) - p0)[2] > 0 else -1.0
            r = _rotation(axis, sense * (math.pi - applied[h.id]))
            transforms[other] = (rot_p @ r, rot_p @ (p0 - r @ p0) + off_p)
            stack.append(other)

    vertices = {}
    for f in net.faces:
        rot, off = transforms[f]
        vertices[f] = lifted[f] @ rot.T + off
    folded = FoldedNet(vertices=vertices, angles=applied, closure_error=0.0)
    return FoldedNet(vertices=vertices, angles=applied, closure_error=closure_error(folded, net))


def closure_error(folded: FoldedNet, net: NetSpec) -> float:
    """Worst endpoint gap over all mating pairs, endpoints paired by proximity."""
    worst = 0.0
    for m in net.mating:
        va, vb = folded.vertices[m.a.face], folded.vertices[m.b.face]
        p0, p1 = va[m.a.i], va[m.a.j]
        q0, q1 = vb[m.b.i], vb[m.b.j]
        straight = max(np.linalg.norm(p0 - q0), np.linalg.norm(p1 - q1))
        crossed = max(np.linalg.norm(p0 - q1), np.linalg.norm(p1 - q0))
        worst = max(worst, float(min(straight, crossed)))
    return worst


def predict_fold(net: NetSpec, **solver) -> FoldedNet:
    """Solve each hinge's joint, then fold the net at the solved angles."""
    solutions = {}
    for h in net.hinges:
        if h.joint is None:
            raise ValueError(f"hinge {h.id} has no joint configuration")
        try:
            solutions[h.id] = solve_equilibrium(h.joint, **solver)
        except SolverError as exc:
            raise HingeSolveError(h.id, exc) from exc
    folded = fold_net(net, {hid: s.alpha for hid, s in solutions.items()})
    return FoldedNet(folded.vertices, folded.angles, folded.closure_error, solutions)


def target_angles(net: NetSpec) -> Dict[str, float]:
    missing = [h.id for h in net.hinges if h.target_angle is None]
    if missing:
        raise MissingAngleError(f"hinges without target angle: {', '.join(missing)}")
    return {h.id: h.target_angle for h in net.hinges}


# -- canonical nets ---------------------------------------------------------------

_PHI = (1 + math.sqrt(5)) / 2


def _solid_vertices(name: str) -> np.ndarray:
    if name == "tetrahedron":
        v = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif name == "square_pyramid":
        v = [(1, 1, 0), (-1, 1, 0), (-1, -1, 0), (1, -1, 0), (0, 0, math.sqrt(2))]
    elif name == "cube":
        v = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    elif name == "octahedron":
        v = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    elif name == "dodecahedron":
        v = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
        for a in (-1, 1):
            for b in (-1, 1):
                v += [(0, a / _PHI, b * _PHI), (a / _PHI, b * _PHI, 0), (a * _PHI, 0, b / _PHI)]
    else:
        raise ValueError(f"unknown polyhedron {name!r}; expected one of {', '.join(POLYHEDRA)}")
    return np.array(v, dtype=float)


def _solid_faces(verts: np.ndarray) -> List[List[int]]:
    """Faces of a convex solid as vertex lists, counter-clockwise seen from outside."""
    hull = ConvexHull(verts)
    planes: Dict[Tuple[float, ...], set] = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq, 9))
        planes.setdefault(key, set()).update(int(i) for i in simplex)
    centre = verts.mean(axis=0)
    faces = []
    for eq, idx in planes.items():
        normal = np.array(eq[:3])
        idx = sorted(idx)
        c = verts[idx].mean(axis=0)
        e1 = verts[idx[0]] - c
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(normal, e1)
        order = sorted(idx, key=lambda i: math.atan2(np.dot(verts[i] - c, e2), np.dot(verts[i] - c, e1)))
        faces.append(order)
    # deterministic: lowest face first, then by azimuth and height of the centroid
    def rank(f):
        c = verts[f].mean(axis=0) - centre
        return (round(c[2], 9), round(math.atan2(c[1], c[0]), 9))
    return sorted(faces, key=rank)


def _face_graph(faces: List[List[int]]):
    """Map of face index -> {neighbour index: shared (u, v) vertex pair}."""
    owner = {}
    adj = defaultdict(dict)
    for fi, f in enumerate(faces):
        for k in range(len(f)):
            e = frozenset((f[k], f[(k + 1) % len(f)]))
            if e in owner:
                adj[fi][owner[e]] = adj[owner[e]][fi] = tuple(sorted(e))
            else:
                owner[e] = fi
    return adj


def _spanning_tree(name: str, verts, faces, adj) -> Tuple[int, List[Tuple[int, int]]]:
    """Root face and (parent, child) tree edges giving the documented net shape."""
    n = len(faces)
    if name == "octahedron":
        # belt of six faces around a 3-fold axis, capped by two opposite faces
        top = 0
        centroid = [verts[f].mean(axis=0) for f in faces]
        bottom = min(range(n), key=lambda f: float(np.dot(centroid[f], centroid[top])))
        belt = [f for f in range(n) if f not in (top, bottom)]
        path = [belt[0]]
        while len(path) < len(belt):
            path.append(min(g for g in adj[path[-1]] if g in belt and g not in path))
        edges = list(zip(path, path[1:]))
        edges.append((min(f for f in path if top in adj[f]), top))
        edges.append((max((f for f in path if bottom in adj[f]), key=path.index), bottom))
        return path[2], edges
    if name == "dodecahedron":
        root = 0
        depth = _bfs_depths(adj, root)
        opposite = max(range(n), key=lambda f: depth[f])
        ring1 = sorted(adj[root])
        ring2 = sorted(adj[opposite])
        edges = [(root, f) for f in ring1] + [(opposite, f) for f in ring2]
        bridge_from = ring1[0]
        bridge_to = min(g for g in adj[bridge_from] if g in ring2)
        edges.append((bridge_from, bridge_to))
        return root, edges
    # tetrahedron fan, pyramid star, cube cross: breadth-first from the lowest face
    root = 0
    seen = {root}
    edges = []
    queue = [root]
    while queue:
        f = queue.pop(0)
        for g in sorted(adj[f]):
            if g not in seen:
                seen.add(g)
                edges.append((f, g))
                queue.append(g)
    return root, edges


def _bfs_depths(adj, root) -> Dict[int, int]:
    depth = {root: 0}
    queue = [root]
    while queue:
        f = queue.pop(0)
        for g in sorted(adj[f]):
            if g not in depth:
                depth[g] = depth[f] + 1
                queue.append(g)
    return depth


def _face_frame(verts: np.ndarray, face: List[int]) -> np.ndarray:
    """Intrinsic 2D coordinates of a face, viewed from outside the solid."""
    p = verts[face]
    normal = np.cross(p[1] - p[0], p[2] - p[0])
    normal /= np.linalg.norm(normal)
    e1 = (p[1] - p[0]) / np.linalg.norm(p[1] - p[0])
    e2 = np.cross(normal, e1)
    return np.column_stack([(p - p[0]) @ e1, (p - p[0]) @ e2])


def _dihedral(verts, fa, fb) -> float:
    centre = verts.mean(axis=0)
    normals = []
    for f in (fa, fb):
        p = verts[f]
        n = np.cross(p[1] - p[0], p[2] - p[0])
        n /= np.linalg.norm(n)
        if np.dot(n, p.mean(axis=0) - centre) < 0:
            n = -n
        normals.append(n)
    return math.pi - math.acos(float(np.clip(np.dot(*normals), -1.0, 1.0)))


def canonical_net(name: str, edge_length: float) -> NetSpec:
    """Standard net of a regular-faced solid with hinge tree, mating edges and targets.

    Shapes: tetrahedron as a fan of three triangles around one face, square
    pyramid as a star around the base, cube as a cross (lid on the first
    side face), octahedron as a belt strip of six triangles with two caps,
    dodecahedron as two five-petal rosettes joined by one hinge.
    """
    targets = polyhedron_targets(name)
    if not edge_length > 0:
        raise ValueError("edge_length must be > 0")
    verts = _solid_vertices(name)
    verts = verts * (edge_length / _min_edge(verts))
    faces = _solid_faces(verts)
    adj = _face_graph(faces)
    root, tree = _spanning_tree(name, verts, faces, adj)
    ids = [f"f{k}" for k in range(len(faces))]

    # orient tree edges away from the root
    tree_adj = defaultdict(list)
    for a, b in tree:
        tree_adj[a].append(b)
        tree_adj[b].append(a)
    ordered, queue, seen = [], [root], {root}
    while queue:
        p = queue.pop(0)
        for c in sorted(tree_adj[p]):
            if c not in seen:
                seen.add(c)
                ordered.append((p, c))
                queue.append(c)
    if len(seen) != len(faces) or len(ordered) != len(tree):
        raise AssertionError(f"{name}: face tree does not span the solid")

    local = {k: _face_frame(verts, f) for k, f in enumerate(faces)}
    layout = {root: local[root]}
    hinges = []
    tree_edges = set()
    for p, c in ordered:
        u, v = adj[p][c]
        ea = (faces[p].index(u), faces[p].index(v))
        eb = (faces[c].index(u), faces[c].index(v))
        pa = layout[p]
        layout[c] = _place(local[c], eb, pa[ea[0]], pa[ea[1]], pa.mean(axis=0))
        tree_edges.add(frozenset((u, v)))
        alpha = _dihedral(verts, faces[p], faces[c])
        target = min(targets, key=lambda t: abs(t - alpha))
        if abs(target - alpha) > 1e-9:
            raise AssertionError(f"{name}: dihedral {alpha} matches no known target")
        hinges.append(Hinge(ids[p], ids[c], ea, eb, target_angle=target, id=f"h{len(hinges)}"))

    mating = []
    for fa in range(len(faces)):
        for fb, (u, v) in sorted(adj[fa].items()):
            if fb <= fa or frozenset((u, v)) in tree_edges:
                continue
            mating.append(MatingPair(
                EdgeRef(ids[fa], faces[fa].index(u), faces[fa].index(v)),
                EdgeRef(ids[fb], faces[fb].index(u), faces[fb].index(v)),
            ))
    return NetSpec(
        faces={ids[k]: tuple(map(tuple, layout[k])) for k in range(len(faces))},
        hinges=tuple(hinges),
        mating=tuple(mating),
        root_face=ids[root],
    )


def _min_edge(verts: np.ndarray) -> float:
    d = np.linalg.norm(verts[:, None, :] - verts[None, :, :], axis=-1)
    return float(d[d > 1e-12].min())


# -- file formats -------------------------------------------------------------------


def _joint_from_dict(d: dict, config) -> JointConfig:
    hd = d.get("hinge", {})
    width = hd.get("width_mm", config.hinge_width * 1e3) / 1e3
    length = hd.get("length_mm", config.hinge_length * 1e3) / 1e3
    e = hd.get("young_modulus_gpa", config.young_modulus / 1e9) * 1e9
    lh = hd.get("layer_height_mm", config.layer_height * 1e3) / 1e3
    if "layers" in hd:
        hinge = HingeSpec.from_layers(hd["layers"], width, length, e, lh)
    elif "thickness_mm" in hd:
        hinge = HingeSpec(hd["thickness_mm"] / 1e3, width, length, e, layer_height=lh)
    else:
        raise ValueError("joint.hinge needs 'layers' or 'thickness_mm'")
    bd = d.get("band")
    if isinstance(bd, str):
        band = config.band(bd)
    elif isinstance(bd, dict):
        base = config.bands.get(bd.get("label", ""))
        if base is None and not {"diameter_mm", "stiffness_n_per_m"} <= set(bd):
            raise ValueError("joint.band needs diameter_mm and stiffness_n_per_m unless it names a preset")
        band = BandSpec(
            diameter=bd["diameter_mm"] / 1e3 if "diameter_mm" in bd else base.diameter,
            stiffness=bd["stiffness_n_per_m"] if "stiffness_n_per_m" in bd else base.stiffness,
            gamma=bd.get("gamma", base.gamma if base else config.gamma),
            label=bd.get("label", ""),
        )
    else:
        raise ValueError("joint.band must be a preset name or an object")
    stop = d.get("stop_angle_deg")
    return JointConfig(hinge, band, d["hook_spacing_mm"] / 1e3, math.radians(stop) if stop is not None else None)


def _joint_to_dict(j: JointConfig) -> dict:
    h = {"width_mm": j.hinge.width * 1e3, "length_mm": j.hinge.length * 1e3,
         "young_modulus_gpa": j.hinge.young_modulus / 1e9, "layer_height_mm": j.hinge.layer_height * 1e3}
    if j.hinge.layers is not None:
        h["layers"] = j.hinge.layers
    else:
        h["thickness_mm"] = j.hinge.thickness * 1e3
    out = {
        "hinge": h,
        "band": {"diameter_mm": j.band.diameter * 1e3, "stiffness_n_per_m": j.band.stiffness,
                 "gamma": j.band.gamma, "label": j.band.label},
        "hook_spacing_mm": j.hook_spacing * 1e3,
    }
    if j.stop_angle is not None:
        out["stop_angle_deg"] = math.degrees(j.stop_angle)
    return out


def net_from_dict(d: dict, config=None) -> NetSpec:
    """Build a net from the JSON structure (lengths in mm, angles in degrees)."""
    from .config import ToolConfig

    config = config or ToolConfig()
    try:
        faces = {str(f["id"]): tuple((x / 1e3, y / 1e3) for x, y in f["vertices"]) for f in d["faces"]}
        hinges = []
        for k, h in enumerate(d.get("hinges", [])):
            joint = _joint_from_dict(h["joint"], config) if h.get("joint") is not None else None
            tgt = h.get("target_angle_deg")
            hinges.append(Hinge(
                str(h["face_a"]), str(h["face_b"]), tuple(h["edge_a"]), tuple(h["edge_b"]),
                joint=joint, target_angle=math.radians(tgt) if tgt is not None else None,
                id=str(h.get("id", f"h{k}")),
            ))
        mating = tuple(
            MatingPair(EdgeRef(str(m["a"]["face"]), m["a"]["i"], m["a"]["j"]),
                       EdgeRef(str(m["b"]["face"]), m["b"]["i"], m["b"]["j"]))
            for m in d.get("mating", [])
        )
        return NetSpec(faces=faces, hinges=tuple(hinges), mating=mating, root_face=str(d["root_face"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed net description: missing or bad field {exc}") from exc


def net_to_dict(net: NetSpec) -> dict:
    hinges = []
    for h in net.hinges:
        item = {"id": h.id, "face_a": h.face_a, "face_b": h.face_b,
                "edge_a": list(h.edge_a), "edge_b": list(h.edge_b)}
        if h.joint is not None:
            item["joint"] = _joint_to_dict(h.joint)
        if h.target_angle is not None:
            item["target_angle_deg"] = math.degrees(h.target_angle)
        hinges.append(item)
    return {
        "faces": [{"id": f, "vertices": [[x * 1e3, y * 1e3] for x, y in pts]} for f, pts in net.faces.items()],
        "hinges": hinges,
        "mating": [{"a": {"face": m.a.face, "i": m.a.i, "j": m.a.j},
                    "b": {"face": m.b.face, "i": m.b.i, "j": m.b.j}} for m in net.mating],
        "root_face": net.root_face,
    }


def load_net(path, config=None) -> NetSpec:
    return net_from_dict(json.loads(Path(path).read_text()), config)


def dump_net(net: NetSpec, path) -> None:
    Path(path).write_text(json.dumps(net_to_dict(net), indent=2) + "\n")


def geometry_csv(folded: FoldedNet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["face", "vertex", "x_mm", "y_mm", "z_mm"])
    for f, pts in folded.vertices.items():
        for k, (x, y, z) in enumerate(pts):
            w.writerow([f, k, f"{x * 1e3:.9f}", f"{y * 1e3:.9f}", f"{z * 1e3:.9f}"])
    return buf.getvalue()

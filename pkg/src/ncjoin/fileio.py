"""JSON interchange formats for systems and dual-system groups.

Matrices are nested row-major arrays whose entries are [re, im] pairs
(bare numbers are accepted on input and read as real). A system file is

    {"blocks": [n_1, ...],
     "state": {"density": <block-diagonal matrix>},
     "group": {"kind": "Z" | "Zk" | "Zm", "k": int, "m": int},
     "generators": [{"perm": [...], "unitary": <block-diagonal matrix>}, ...]}

where "perm" is the block permutation in the pull convention (output block
k reads input block perm[k]) and "unitary" is the block-diagonal conjugator.

A dual-system file is

    {"family": "free" | "finperm",
     "tracks": [{"id": "x", "kind": "shift"} | {"id": "y", "kind": "cycle", "m": 3}],
     "h": {"cycles": [["p", "q", ...], ...]}}

"h" is only meaningful for the finperm family: it spells out extra finite
cycles of the conjugating bijection over fresh letter names, which are
normalized into cycle tracks at load time; the original names stay usable
in words through the returned alias table.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import (
    Automorphism,
    BlockStructure,
    FaithfulState,
    FiniteSystem,
    GroupDescriptor,
)
from .dual import DualSystem, Track, TrackSpec
from .errors import InputFormatError, StructureError


def _entry_from_json(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise InputFormatError(f"matrix entry must be a number or [re, im], got {x!r}")


def matrix_from_json(data) -> np.ndarray:
    try:
        rows = [[_entry_from_json(x) for x in row] for row in data]
    except TypeError as exc:
        raise InputFormatError(f"malformed matrix: {exc}") from exc
    m = np.array(rows, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputFormatError(f"matrix must be square, got shape {m.shape}")
    return m


def matrix_to_json(m: np.ndarray):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def _read(source) -> dict:
    if isinstance(source, dict):
        return source
    text = Path(source).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{source}: not valid JSON ({exc})") from exc


def load_group(data) -> GroupDescriptor:
    if not isinstance(data, dict) or "kind" not in data:
        raise InputFormatError("group must be an object with a 'kind'")
    kind = data["kind"]
    try:
        if kind == "Z":
            return GroupDescriptor("Z")
        if kind == "Zk":
            return GroupDescriptor("Zk", k=int(data["k"]))
        if kind == "Zm":
            return GroupDescriptor("Zm", m=int(data["m"]))
    except (KeyError, ValueError, StructureError) as exc:
        raise InputFormatError(f"malformed group descriptor: {exc}") from exc
    raise InputFormatError(f"unknown group kind {kind!r}")


def load_system(source) -> FiniteSystem:
    data = _read(source)
    try:
        structure = BlockStructure(tuple(int(n) for n in data["blocks"]))
    except (KeyError, TypeError, StructureError) as exc:
        raise InputFormatError(f"malformed blocks: {exc}") from exc
    try:
        density_m = matrix_from_json(data["state"]["density"])
        density = structure.from_block_matrix(density_m)
    except (KeyError, StructureError) as exc:
        raise InputFormatError(f"malformed state: {exc}") from exc
    state = FaithfulState(structure, density.blocks)
    group = load_group(data.get("group", {"kind": "Z"}))
    gens = []
    for gi, g in enumerate(data.get("generators", [])):
        try:
            perm = tuple(int(p) for p in g["perm"])
            unitary = structure.from_block_matrix(matrix_from_json(g["unitary"]))
            gens.append(Automorphism(structure, perm, unitary.blocks))
        except (KeyError, TypeError, StructureError) as exc:
            raise InputFormatError(f"malformed generator {gi}: {exc}") from exc
    try:
        return FiniteSystem(structure, state, group, gens)
    except StructureError as exc:
        raise InputFormatError(str(exc)) from exc


def dump_system(sys: FiniteSystem) -> dict:
    group: dict = {"kind": sys.group.kind}
    if sys.group.kind == "Zk":
        group["k"] = sys.group.k
    if sys.group.kind == "Zm":
        group["m"] = sys.group.m
    return {
        "blocks": list(sys.structure.block_sizes),
        "state": {"density": matrix_to_json(sys.state.density_element().block_matrix())},
        "group": group,
        "generators": [
            {"perm": list(g.block_perm), "unitary": _conj_block_matrix(sys, g)}
            for g in sys.generators
        ],
    }


def _conj_block_matrix(sys: FiniteSystem, g: Automorphism):
    from .algebra import AlgebraElement

    return matrix_to_json(AlgebraElement(sys.structure, g.conjugator).block_matrix())


@dataclass
class DualFile:
    system: DualSystem
    aliases: dict[str, str] = field(default_factory=dict)

    def resolve_text(self, text: str) -> str:
        """Substitute alias letter names by their track tokens in a word string."""
        if not self.aliases:
            return text

        def sub(match):
            name = match.group(0)
            return self.aliases.get(name, name)

        return re.sub(r"[A-Za-z_]+(?![-\d])", sub, text)


def load_dual(source) -> DualFile:
    data = _read(source)
    family = data.get("family")
    if family not in ("free", "finperm"):
        raise InputFormatError(f"family must be 'free' or 'finperm', got {family!r}")
    tracks = []
    for t in data.get("tracks", []):
        try:
            kind = t["kind"]
            if kind == "cycle":
                tracks.append(Track(t["id"], "cycle", int(t["m"])))
            elif kind == "shift":
                tracks.append(Track(t["id"], "shift"))
            else:
                raise InputFormatError(f"unknown track kind {kind!r}")
        except (KeyError, TypeError, StructureError) as exc:
            raise InputFormatError(f"malformed track {t!r}: {exc}") from exc
    aliases: dict[str, str] = {}
    if "h" in data and data["h"] is not None:
        if family != "finperm":
            raise InputFormatError("'h' is only meaningful for the finperm family")
        cycles = data["h"].get("cycles", [])
        for ci, cyc in enumerate(cycles):
            # track ids must be purely alphabetic; digits belong to indices
            suffix = ""
            k = ci
            while True:
                suffix = chr(ord("a") + k % 26) + suffix
                k = k // 26 - 1
                if k < 0:
                    break
            tid = f"h{suffix}"
            if any(t.id == tid for t in tracks):
                raise InputFormatError(f"track id {tid} collides with an 'h' cycle")
            names = [str(x) for x in cyc]
            for name in names:
                if not re.fullmatch(r"[A-Za-z_]+", name):
                    raise InputFormatError(
                        f"'h' cycle letters must be bare names, got {name!r}")
                if name in aliases:
                    raise InputFormatError(f"letter {name!r} appears in two 'h' cycles")
            tracks.append(Track(tid, "cycle", len(names)))
            for pos, name in enumerate(names):
                aliases[name] = f"{tid}{pos}"
    try:
        system = DualSystem(family, TrackSpec(tuple(tracks)))
    except StructureError as exc:
        raise InputFormatError(str(exc)) from exc
    return DualFile(system=system, aliases=aliases)


def dump_dual(sys: DualSystem) -> dict:
    tracks = []
    for t in sys.spec.tracks:
        if t.kind == "cycle":
            tracks.append({"id": t.id, "kind": "cycle", "m": t.m})
        else:
            tracks.append({"id": t.id, "kind": "shift"})
    return {"family": sys.family, "tracks": tracks}

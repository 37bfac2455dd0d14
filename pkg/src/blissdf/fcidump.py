"""FCIDUMP integral file ingestion and emission.

FCIDUMP files store chemists'-notation integrals (ij|kl) for the
normal-ordered Hamiltonian

    H = E_core + sum_ij t_ij a+_is a_js
        + 1/2 sum_ijkl (ij|kl) a+_is a+_kt a_lt a_js.

The loader converts to the excitation-ordered convention used throughout
this package:

    g_ijkl = (ij|kl) / 2,    h_ij = t_ij - 1/2 sum_k (ik|kj),

which reproduces the source operator identically on every particle-number
sector (an exact operator identity, verified by the dense oracle tests).
The integral convention is recorded as ``INTEGRAL_CONVENTION`` and echoed in
all run reports, since upstream integral files do not declare theirs.

Format accepted: a namelist header ``&FCI NORB=...,NELEC=...,MS2=...,``
terminated by ``&END`` or ``/`` (possibly spanning several lines; extra keys
such as ORBSYM are tolerated), followed by whitespace-separated records
``value i j k l`` with 1-based indices. ``i j 0 0`` is a one-body entry,
``0 0 0 0`` the core constant, anything else a two-body entry. The writer
emits only the canonical representative of each 8-fold orbit.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from blissdf.hamiltonian import Hamiltonian

INTEGRAL_CONVENTION = "fcidump-chemist-halved"

# Relative disagreement allowed between records of the same symmetry orbit;
# larger asymmetry is treated as corrupt input, smaller is averaged away.
ASYMMETRY_RTOL = 1e-10

_FLOAT_FORMAT = "%.17g"


class FcidumpError(ValueError):
    """Malformed FCIDUMP content; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _canonical_pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i >= j else (j, i)


def _canonical_quad(i: int, j: int, k: int, l: int) -> tuple[int, int, int, int]:
    ij = _canonical_pair(i, j)
    kl = _canonical_pair(k, l)
    return ij + kl if ij >= kl else kl + ij


class _OrbitAccumulator:
    """Collects records per symmetry orbit, averaging consistent duplicates."""

    def __init__(self, kind: str):
        self.kind = kind
        self.records: dict[tuple, list[tuple[float, int]]] = {}

    def add(self, key: tuple, value: float, line: int):
        self.records.setdefault(key, []).append((value, line))

    def resolve(self) -> dict[tuple, float]:
        out = {}
        for key, entries in self.records.items():
            values = [v for v, _ in entries]
            lo, hi = min(values), max(values)
            scale = max(abs(lo), abs(hi))
            if scale > 0.0 and (hi - lo) > ASYMMETRY_RTOL * scale:
                lines = sorted(ln for _, ln in entries)
                raise FcidumpError(
                    f"conflicting {self.kind} entries for orbit "
                    f"{tuple(k + 1 for k in key)}: values {lo!r} and {hi!r} "
                    f"disagree beyond relative tolerance {ASYMMETRY_RTOL:g} "
                    f"(lines {lines})",
                    line=lines[-1],
                )
            out[key] = sum(values) / len(values)
        return out


def _parse_header(lines: list[str]) -> tuple[int, int, int, int]:
    """Parse the &FCI namelist; returns (norb, nelec, ms2, first_data_line)."""
    if not lines:
        raise FcidumpError("empty file", line=1)
    header_parts: list[str] = []
    end_line = None
    for idx, raw in enumerate(lines):
        stripped = raw.strip()
        if idx == 0 and not stripped.upper().startswith("&FCI"):
            raise FcidumpError("header must start with &FCI", line=1)
        body = stripped
        terminated = False
        for terminator in ("&END", "/"):
            pos = body.upper().find(terminator)
            if pos >= 0:
                body = body[:pos]
                terminated = True
                break
        header_parts.append(body)
        if terminated:
            end_line = idx
            break
    if end_line is None:
        raise FcidumpError("header not terminated by &END or /", line=len(lines))

    header = " ".join(header_parts)
    header = re.sub(r"^\s*&FCI", "", header, flags=re.IGNORECASE)

    def read_int(key: str, required: bool, default: int = 0) -> int:
        match = re.search(rf"{key}\s*=\s*([+-]?\d+)", header, flags=re.IGNORECASE)
        if match is None:
            if required:
                raise FcidumpError(f"header is missing {key}", line=end_line + 1)
            return default
        return int(match.group(1))

    norb = read_int("NORB", required=True)
    nelec = read_int("NELEC", required=True)
    ms2 = read_int("MS2", required=False)
    if norb < 1:
        raise FcidumpError(f"NORB={norb} must be positive", line=end_line + 1)
    if not 0 <= nelec <= 2 * norb:
        raise FcidumpError(
            f"NELEC={nelec} outside [0, {2 * norb}]", line=end_line + 1
        )
    return norb, nelec, ms2, end_line + 1


def load_integrals(path: str | Path) -> Hamiltonian:
    """Load an FCIDUMP file and convert to the excitation-ordered convention.

    Args:
        path: Location of the FCIDUMP text file.

    Returns:
        Hamiltonian with symmetrized h and g, the scalar integral as
        ``core_constant``, and ``n_electrons`` from the header NELEC.

    Raises:
        FcidumpError: On malformed header, non-numeric or non-finite values,
            indices outside the declared NORB range, or orbit entries that
            disagree beyond the asymmetry tolerance. The error message names
            the offending line.
        FileNotFoundError: If the file does not exist.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    norb, nelec, _ms2, first_data = _parse_header(lines)

    one_body = _OrbitAccumulator("one-body")
    two_body = _OrbitAccumulator("two-body")
    core_entries: list[tuple[float, int]] = []

    for idx in range(first_data, len(lines)):
        lineno = idx + 1
        tokens = lines[idx].split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise FcidumpError(
                f"expected 'value i j k l', got {len(tokens)} fields", line=lineno
            )
        try:
            value = float(tokens[0].upper().replace("D", "E"))
        except ValueError:
            raise FcidumpError(f"unparseable value {tokens[0]!r}", line=lineno)
        if not np.isfinite(value):
            raise FcidumpError(f"non-finite value {tokens[0]!r}", line=lineno)
        try:
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError:
            raise FcidumpError(
                f"unparseable orbital indices {tokens[1:]!r}", line=lineno
            )

        if i == j == k == l == 0:
            core_entries.append((value, lineno))
        elif k == 0 and l == 0:
            if not (1 <= i <= norb and 1 <= j <= norb):
                raise FcidumpError(
                    f"one-body indices ({i}, {j}) outside 1..{norb}", line=lineno
                )
            one_body.add(_canonical_pair(i - 1, j - 1), value, lineno)
        else:
            if not all(1 <= x <= norb for x in (i, j, k, l)):
                raise FcidumpError(
                    f"two-body indices ({i}, {j}, {k}, {l}) outside 1..{norb}",
                    line=lineno,
                )
            two_body.add(
                _canonical_quad(i - 1, j - 1, k - 1, l - 1), value, lineno
            )

    core = 0.0
    if core_entries:
        core = sum(v for v, _ in core_entries) / len(core_entries)

    t_mat = np.zeros((norb, norb))
    for (i, j), value in one_body.resolve().items():
        t_mat[i, j] = value
        t_mat[j, i] = value

    v_chem = np.zeros((norb, norb, norb, norb))
    for (i, j, k, l), value in two_body.resolve().items():
        for a, b in ((i, j), (j, i)):
            for c, d in ((k, l), (l, k)):
                v_chem[a, b, c, d] = value
                v_chem[c, d, a, b] = value

    # Reorder a+a+aa -> a+a a+a: the contraction term moves into the one-body
    # matrix, the remaining two-body coefficient is halved.
    g = 0.5 * v_chem
    h = t_mat - 0.5 * np.einsum("ikkj->ij", v_chem)
    return Hamiltonian(h=h, g=g, core_constant=core, n_electrons=nelec)


def write_integrals(path: str | Path, ham: Hamiltonian, ms2: int = 0) -> None:
    """Write a Hamiltonian as an FCIDUMP file, inverting the load conversion.

    Only the canonical representative of each 8-fold orbit is emitted, and
    exact zeros are skipped. Values are printed with 17 significant digits so
    they parse back to the same double.
    """
    path = Path(path)
    n = ham.n_orbitals
    v_chem = 2.0 * ham.g
    t_mat = ham.h + 0.5 * np.einsum("ikkj->ij", v_chem)

    lines = [f" &FCI NORB={n},NELEC={ham.n_electrons},MS2={ms2},", " &END"]
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    value = v_chem[i, j, k, l]
                    if value != 0.0:
                        lines.append(
                            f"{_FLOAT_FORMAT % value} {i + 1} {j + 1} {k + 1} {l + 1}"
                        )
    for i in range(n):
        for j in range(i + 1):
            if t_mat[i, j] != 0.0:
                lines.append(f"{_FLOAT_FORMAT % t_mat[i, j]} {i + 1} {j + 1} 0 0")
    lines.append(f"{_FLOAT_FORMAT % ham.core_constant} 0 0 0 0")
    path.write_text("\n".join(lines) + "\n")

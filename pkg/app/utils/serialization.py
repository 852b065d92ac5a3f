"""
Formats texte des champs et des expansions, export CSV et JSON.

Champ (spectral-field v1):

    # coherent-nse spectral-field v1
    resolution 16
    box 6.2831853071795862 6.2831853071795862 6.2831853071795862
    part re
    modes 4
    k1 k2 k3 re1 im1 re2 im2 re3 im3
    ...
    part im          (champs complexifiés seulement)
    ...

Les réels sont écrits en %.17g (aller-retour exact).

Expansion (expansion v1):

    # coherent-nse expansion v1
    k 1
    class_m 0
    class_mu -3/2
    resolution 16
    box ...
    terms 2
    term
    exponent_re 0 -3/2 0
    exponent_im 1 0 0
    coefficient inline | coefficient file <chemin relatif>
    part re ...                     (si inline)
    end
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from app.core.exceptions import SerializationError
from app.models.expansion import Expansion, ExpansionTerm, ExponentVector
from app.models.spectral_field import ComplexField, Lattice, SpectralField
from app.schemas.experiment_schema import parse_rational

logger = logging.getLogger(__name__)

FIELD_HEADER = "# coherent-nse spectral-field v1"
EXPANSION_HEADER = "# coherent-nse expansion v1"


def _g(value: float) -> str:
    return "%.17g" % value


# ============ Champs ============

def _part_lines(name: str, u: SpectralField) -> List[str]:
    lat = u.lattice
    coeffs = u.coefficients
    nonzero = np.argwhere(np.any(coeffs != 0, axis=0))
    lines = [f"part {name}", f"modes {len(nonzero)}"]
    for index in nonzero:
        i, j, l = (int(v) for v in index)
        k = lat.integer_modes[:, i, j, l]
        vec = coeffs[:, i, j, l]
        values = " ".join(f"{_g(c.real)} {_g(c.imag)}" for c in vec)
        lines.append(f"{int(k[0])} {int(k[1])} {int(k[2])} {values}")
    return lines


def _lattice_lines(lat: Lattice) -> List[str]:
    return [f"resolution {lat.resolution}", "box " + " ".join(_g(b) for b in lat.box_lengths)]


def field_lines(w: Union[SpectralField, ComplexField]) -> List[str]:
    """Blocs 'part' d'un champ (sans en-tête ni réseau)."""
    if isinstance(w, ComplexField):
        return _part_lines("re", w.re) + _part_lines("im", w.im)
    return _part_lines("re", w)


def dumps_field(w: Union[SpectralField, ComplexField]) -> str:
    lines = [FIELD_HEADER] + _lattice_lines(w.lattice) + field_lines(w)
    return "\n".join(lines) + "\n"


def write_field(path: Path, w: Union[SpectralField, ComplexField]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_field(w), encoding="utf-8")
    logger.debug(f"📦 Champ écrit: {path}")
    return path


class _Lines:
    """Itérateur de lignes non vides avec numéro, pour les messages d'erreur."""

    def __init__(self, text: str, source: str):
        self._items: Iterator[Tuple[int, str]] = (
            (n, line.strip()) for n, line in enumerate(text.splitlines(), start=1) if line.strip()
        )
        self._peeked: Optional[Tuple[int, str]] = None
        self.source = source

    def peek(self) -> Optional[Tuple[int, str]]:
        if self._peeked is None:
            self._peeked = next(self._items, None)
        return self._peeked

    def next(self) -> Tuple[int, str]:
        item = self.peek()
        if item is None:
            raise SerializationError(f"{self.source}: fin de fichier inattendue")
        self._peeked = None
        return item

    def keyword(self, key: str) -> List[str]:
        n, line = self.next()
        parts = line.split()
        if parts[0] != key:
            raise SerializationError(f"{self.source}:{n}: attendu '{key}', lu '{parts[0]}'")
        return parts[1:]


def _read_lattice(lines: _Lines) -> Lattice:
    try:
        (n,) = lines.keyword("resolution")
        box = tuple(float(v) for v in lines.keyword("box"))
        return Lattice(int(n), box)
    except ValueError as e:
        raise SerializationError(f"{lines.source}: réseau invalide ({e})") from e


def _read_part(lines: _Lines, lattice: Lattice) -> Tuple[str, SpectralField]:
    (name,) = lines.keyword("part")
    (count,) = lines.keyword("modes")
    coeffs = np.zeros((3,) + lattice.shape, dtype=np.complex128)
    for _ in range(int(count)):
        n, line = lines.next()
        parts = line.split()
        if len(parts) != 9:
            raise SerializationError(f"{lines.source}:{n}: 9 valeurs attendues, {len(parts)} lues")
        try:
            k = [int(v) for v in parts[:3]]
            values = [float(v) for v in parts[3:]]
            index = lattice.mode_index(k)
        except ValueError as e:
            raise SerializationError(f"{lines.source}:{n}: {e}") from e
        coeffs[(slice(None),) + index] = [complex(values[2 * c], values[2 * c + 1]) for c in range(3)]
    return name, SpectralField(lattice, coeffs)


def _read_parts(lines: _Lines, lattice: Lattice) -> ComplexField:
    parts: Dict[str, SpectralField] = {}
    while True:
        item = lines.peek()
        if item is None or not item[1].startswith("part"):
            break
        name, u = _read_part(lines, lattice)
        if name not in ("re", "im"):
            raise SerializationError(f"{lines.source}: partie inconnue '{name}'")
        parts[name] = u
    if "re" not in parts:
        raise SerializationError(f"{lines.source}: partie 're' absente")
    return ComplexField(parts["re"], parts.get("im", SpectralField.zero(lattice)))


def loads_complex_field(text: str, source: str = "<texte>") -> ComplexField:
    lines = _Lines(text, source)
    _, header = lines.next()
    if header != FIELD_HEADER:
        raise SerializationError(f"{source}: en-tête de champ invalide")
    lattice = _read_lattice(lines)
    return _read_parts(lines, lattice)


def read_complex_field(path: Path) -> ComplexField:
    path = Path(path)
    if not path.exists():
        raise SerializationError(f"Fichier de champ introuvable: {path}")
    return loads_complex_field(path.read_text(encoding="utf-8"), str(path))


def read_field(path: Path) -> SpectralField:
    """Champ réel (la partie 'im', si présente, doit être nulle)."""
    w = read_complex_field(path)
    if not w.im.is_zero():
        raise SerializationError(f"{path}: champ complexifié, un champ réel était attendu")
    return w.re


# ============ Expansions ============

def dumps_expansion(p: Expansion, coefficient_files: Optional[Sequence[str]] = None) -> str:
    """
    Texte d'une expansion; coefficient_files[i] référence le fichier du terme i.
    """
    lines = [
        EXPANSION_HEADER,
        f"k {p.k}",
        f"class_m {p.class_m}",
        f"class_mu {p.class_mu}",
    ] + _lattice_lines(p.lattice) + [f"terms {len(p.terms)}"]
    for i, term in enumerate(p.terms):
        lines.append("term")
        lines.append("exponent_re " + " ".join(str(v) for v in term.exponent.re))
        lines.append("exponent_im " + " ".join(_g(v) for v in term.exponent.im))
        if coefficient_files is not None:
            lines.append(f"coefficient file {coefficient_files[i]}")
        else:
            lines.append("coefficient inline")
            lines.extend(field_lines(term.coefficient))
        lines.append("end")
    return "\n".join(lines) + "\n"


def write_expansion(path: Path, p: Expansion, separate_coefficients: bool = False) -> Path:
    """
    Écrit une expansion; avec separate_coefficients, chaque ξ_α va dans
    <nom>.term<i>.field à côté du fichier principal.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    files = None
    if separate_coefficients:
        files = []
        for i, term in enumerate(p.terms):
            name = f"{path.stem}.term{i}.field"
            write_field(path.parent / name, term.coefficient)
            files.append(name)
    path.write_text(dumps_expansion(p, files), encoding="utf-8")
    logger.info(f"📦 Expansion écrite: {path} ({len(p)} termes)")
    return path


def loads_expansion(text: str, source: str = "<texte>", base_dir: Optional[Path] = None) -> Expansion:
    lines = _Lines(text, source)
    _, header = lines.next()
    if header != EXPANSION_HEADER:
        raise SerializationError(f"{source}: en-tête d'expansion invalide")
    try:
        (k,) = lines.keyword("k")
        (m,) = lines.keyword("class_m")
        (mu,) = lines.keyword("class_mu")
        k, m, mu = int(k), int(m), parse_rational(mu)
    except ValueError as e:
        raise SerializationError(f"{source}: classe invalide ({e})") from e
    lattice = _read_lattice(lines)
    (count,) = lines.keyword("terms")
    terms: List[ExpansionTerm] = []
    for _ in range(int(count)):
        lines.keyword("term")
        re = tuple(parse_rational(v) for v in lines.keyword("exponent_re"))
        im = tuple(float(v) for v in lines.keyword("exponent_im"))
        mode = lines.keyword("coefficient")
        if mode == ["inline"]:
            xi = _read_parts(lines, lattice)
        elif len(mode) == 2 and mode[0] == "file":
            ref = Path(mode[1])
            if not ref.is_absolute() and base_dir is not None:
                ref = base_dir / ref
            xi = read_complex_field(ref)
            lattice.check_same(xi.lattice)
        else:
            raise SerializationError(f"{source}: mode de coefficient inconnu {mode}")
        lines.keyword("end")
        terms.append(ExpansionTerm(ExponentVector(re, im), xi))
    return Expansion(lattice, k, m, mu, tuple(terms))


def read_expansion(path: Path) -> Expansion:
    path = Path(path)
    if not path.exists():
        raise SerializationError(f"Fichier d'expansion introuvable: {path}")
    return loads_expansion(path.read_text(encoding="utf-8"), str(path), path.parent)


# ============ CSV / JSON ============

def write_csv(path: Path, rows: Iterable[Dict], columns: Sequence[str]) -> Path:
    """Une ligne par dictionnaire, colonnes dans l'ordre donné."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: (_g(v) if isinstance(v, float) else v) for key, v in row.items()})
    logger.info(f"📦 CSV écrit: {path}")
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_json(path: Path, model: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"📦 Rapport écrit: {path}")
    return path

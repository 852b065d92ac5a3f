"""
Trajectoire échantillonnée d'une intégration en temps.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.models.spectral_field import SpectralField


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    times: instants d'échantillonnage (strictement croissants)
    diagnostics: séries par nom (energy, enstrophy, divergence, gevrey_α_σ)
    probes: valeurs renvoyées par la sonde à chaque échantillon
    fields: champs échantillonnés si keep_fields
    """

    times: Tuple[float, ...]
    diagnostics: Dict[str, Tuple[float, ...]]
    probes: Tuple[Dict[str, float], ...] = ()
    fields: Optional[Tuple[SpectralField, ...]] = None
    steps: int = 0
    dt: float = 0.0
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("Les instants d'une trajectoire doivent être strictement croissants")
        for name, series in self.diagnostics.items():
            if len(series) != len(self.times):
                raise ValueError(f"Diagnostic '{name}' de longueur incorrecte")

    def __len__(self) -> int:
        return len(self.times)

    def rows(self) -> List[Dict[str, float]]:
        """Une ligne par échantillon: t, diagnostics, sondes."""
        out = []
        for i, t in enumerate(self.times):
            row: Dict[str, float] = {"t": t}
            for name, series in self.diagnostics.items():
                row[name] = series[i]
            if self.probes:
                row.update(self.probes[i])
            out.append(row)
        return out

    def columns(self) -> List[str]:
        cols = ["t"] + list(self.diagnostics)
        if self.probes:
            for key in self.probes[0]:
                if key not in cols:
                    cols.append(key)
        return cols

"""
Exceptions de la bibliothèque.
Toutes dérivent de CoherentNSEError pour être interceptées par la CLI et l'API.
"""


class CoherentNSEError(Exception):
    """Erreur de base de la bibliothèque."""


class DomainError(CoherentNSEError, ValueError):
    """Argument hors du domaine d'un logarithme itéré (t <= E_m(0))."""


class LatticeMismatchError(CoherentNSEError, ValueError):
    """Deux champs ne partagent pas le même réseau de Fourier."""


class ClassViolationError(CoherentNSEError):
    """Un exposant sort de la classe (m, k, mu) attendue."""


class ConjugateClosureError(CoherentNSEError):
    """Expansion non fermée par conjugaison: sa valeur ne serait pas réelle."""


class QuadratureError(CoherentNSEError):
    """La quadrature adaptative n'a pas convergé."""


class SolverError(CoherentNSEError):
    """Échec de l'intégration en temps."""


class BlowUpError(SolverError):
    """L'énergie dépasse le seuil d'explosion configuré."""


class NonFiniteError(SolverError):
    """Valeurs NaN ou infinies détectées pendant l'intégration."""


class FitError(CoherentNSEError, ValueError):
    """Ajustement de pente impossible (échantillons insuffisants ou résidus <= 0)."""


class SerializationError(CoherentNSEError, ValueError):
    """Fichier de champ ou d'expansion illisible."""

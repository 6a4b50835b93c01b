from pathlib import Path


class Config:
    TOOL_VERSION = '0.4.0'
    MAX_WORKERS = 4
    LOG_LEVEL = 'INFO'                    # Niveau de logging

    # Tolérances géométriques
    BOUNDARY_TOL = 1e-9                   # Tolérance d'appartenance au bord (unités de longueur)
    MARKED_POINT_TOL = 1e-12              # Les points marqués doivent être sur le bord à cette précision
    AREA_TOL = 1e-12                      # Tolérance relative sur l'aire déclarée

    # Grilles
    DEFAULT_GRID = 256                    # Résolution des estimations
    TEST_GRID = 64                        # Résolution des tests de propriétés
    FRAME_CELLS = 2                       # Largeur du cadre (CS) sur la boîte plane

    # Admissibilité
    ADMISSIBILITY_RADIUS_CELLS = 2        # Rayon des voisinages U_i (en pas h)
    COLLAR_CELLS = 4                      # Largeur du collier de raccord
    WINDING_CLEARANCE = 4.0               # Garde autour du centre: 4h * Lipschitz

    # Pseudorétractions
    OUTER_RETRACT_SCALE = 1.5             # Rayon du disque S / rayon circonscrit
    IDENTITY_FRACTION = 0.5               # Partie identité du pseudorétract lisse
    EDGE_BAND_FRACTION = 0.25             # Largeur des bandes par arête (fraction de longueur)
    RADIAL_BAND = 0.25                    # Bande radiale des cas 2 et 3

    # Solveur
    P_LADDER = (8.0, 32.0, 128.0)         # Échelle des exposants p
    STEP_SIZE = 0.05                      # Pas initial (unités de la cible)
    PROJECTION_EVERY = 10                 # Cadence de projection
    MAX_ITERATIONS = 400                  # Itérations max par palier
    PLATEAU_TOL = 1e-6                    # Variation relative considérée comme plateau
    PLATEAU_WINDOW = 100                  # Fenêtre du test de plateau
    GRADIENT_SMOOTHING = 1.0              # Lissage gaussien du gradient (en pas h), 0 pour le désactiver
    COARSE_LEVELS = 2                     # Niveaux grossiers résolus avant la grille demandée
    COARSEST_GRID = 32                    # Résolution minimale d'un niveau grossier
    EPS0 = 0.25                           # Rayon epsilon_0 de l'étape de poussée
    ALLOWANCE_FACTOR = 10.0               # Tolérance de discrétisation: facteur * h

    # Jacobien
    JACOBIAN_TOL = 0.02                   # Tolérance de certification du jacobien
    JACOBIAN_SAMPLES = 401                # Échantillons par axe

    # Dynamique
    DEFAULT_DT = 1e-3                     # Pas de temps du RK4

    # Sorties
    RUNS_DIR = Path('runs')               # Dossier des exécutions

    @classmethod
    def update(cls, **kwargs):
        for key, value in kwargs.items():
            setattr(cls, key, value)

    @classmethod
    def get_ladder(cls):
        """Retourne l'échelle des exposants sous forme de tuple croissant."""
        return tuple(float(p) for p in cls.P_LADDER)

    @classmethod
    def get_tolerances(cls):
        """Retourne (bord, aire, plateau) pour les rapports."""
        return (cls.BOUNDARY_TOL, cls.AREA_TOL, cls.PLATEAU_TOL)

from dataclasses import dataclass, field
from typing import Dict, Optional

from ..config import Config


@dataclass
class PipelineCertificate:
    """
    Inégalité certifiée d'une étape de pipeline:
    sortie ≤ facteur·entrée + terme additif + tolérance de discrétisation.
    """
    name: str
    input_sup: float
    output_sup: float
    claimed_factor: float
    claimed_additive: float = 0.0
    allowance: float = 0.0
    input_report: Optional[Dict] = None
    output_report: Optional[Dict] = None
    parameters: Dict = field(default_factory=dict)
    details: Dict = field(default_factory=dict)

    @property
    def claimed_bound(self) -> float:
        return self.claimed_factor * self.input_sup + self.claimed_additive

    @property
    def measured_growth(self) -> float:
        if self.input_sup == 0:
            return 1.0 if self.output_sup == 0 else float('inf')
        return self.output_sup / self.input_sup

    @property
    def slack(self) -> float:
        return self.claimed_bound + self.allowance - self.output_sup

    @property
    def admissible(self) -> bool:
        if self.output_report is None:
            return True
        return bool(self.output_report.get('all_ok', False))

    @property
    def passed(self) -> bool:
        return self.slack >= 0 and self.admissible

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'input_sup': self.input_sup,
            'output_sup': self.output_sup,
            'claimed_factor': self.claimed_factor,
            'claimed_additive': self.claimed_additive,
            'claimed_bound': self.claimed_bound,
            'allowance': self.allowance,
            'measured_growth': self.measured_growth,
            'slack': self.slack,
            'input_report': self.input_report,
            'output_report': self.output_report,
            'parameters': self.parameters,
            'details': self.details,
            'verdict': 'pass' if self.passed else 'fail',
        }


def default_allowance(h: float) -> float:
    return Config.ALLOWANCE_FACTOR * h

from .report import emit_report
from .simulate import FrequencyTable, SampleSpec, simulate

__all__ = ["FrequencyTable", "SampleSpec", "emit_report", "simulate"]

"""Speaker-verification pipeline toolkit.

Modules: frontend (features), augment (waveform corruption), modelmath
(pooling and margin losses), trainer (staged-transfer protocol), backend
(trial scoring), metrics (EER / minDCF), report (figures), cli.
"""

__version__ = "0.1.0"

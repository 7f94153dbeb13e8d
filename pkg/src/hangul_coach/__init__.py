"""Korean pronunciation practice toolkit.

Pipeline: WAV ingestion -> canonical 16 kHz mono PCM -> speech-to-text
diff with per-syllable red highlighting, and in parallel MFCC features
scored for acoustic similarity by a twin-network model. Served over HTTP
by `hangul_coach.service`, driven from the shell by `hangul_coach.cli`.
"""

__version__ = "0.1.0"

CANONICAL_RATE = 16000

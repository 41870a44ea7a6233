from .audit import AuditReport, InsufficientTrials, audit_privacy
from .bench import BenchConfig, BenchReport, run_benchmark, run_sweep
from .session import AdversarySpec, ConfigError, SessionConfig, expected_blame, run_session
from .sketch import sketch_session

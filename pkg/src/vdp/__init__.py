"""Verifiable differential privacy for counting queries and histograms."""
from .dp_params import PrivacyParams, coins_for_privacy, privacy_for_coins
from .group import PublicParams, commit, setup, setup_group
from .transcript import SessionTranscript, verify_session

__version__ = "0.1.0"

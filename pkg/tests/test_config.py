"""Tests for settings."""

from holonomy_lab.config import Settings


class TestSettings:
    """Test Settings."""

    def test_defaults(self):
        """Test default values."""
        settings = Settings(_env_file=None)
        assert settings.threads == 1
        assert settings.fock_cutoff == 40
        assert settings.r_max == 2.0
        assert settings.fd_step > 0

    def test_environment_override(self, monkeypatch):
        """Test HOLONOMY_* variables override defaults."""
        monkeypatch.setenv("HOLONOMY_THREADS", "4")
        monkeypatch.setenv("HOLONOMY_FOCK_CUTOFF", "60")
        settings = Settings(_env_file=None)
        assert settings.threads == 4
        assert settings.fock_cutoff == 60

    def test_explicit_values(self, test_settings):
        """Test the fixture's explicit values."""
        assert test_settings.threads == 2
        assert test_settings.holonomy_steps == 512

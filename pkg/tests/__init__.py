"""Tests for holonomy-lab."""

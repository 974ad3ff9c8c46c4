"""Tests for cptu-state package."""

"""Test suite for the unsup_speech_features package."""

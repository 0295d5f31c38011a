"""Integration tests for the agentic workflow."""

"""Moderator gateway: CLI, HTTP service, and replayable state."""

"""Command-line frontend: spec language, runner and reports."""

"""Subcommands of the septrace CLI, one module each"""

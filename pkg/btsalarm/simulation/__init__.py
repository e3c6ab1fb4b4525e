"""Scenario-driven deterministic simulator"""

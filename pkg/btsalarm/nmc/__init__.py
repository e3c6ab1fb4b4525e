"""Alarm box to NMC reporting chain and the NMC aggregation service"""

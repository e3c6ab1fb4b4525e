"""Sensor models: LM35, photoelectric smoke, reed-switch door, water probe"""

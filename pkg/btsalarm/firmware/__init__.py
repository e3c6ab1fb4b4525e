"""Controller program: classification, settings FSM and the 10 ms tick"""

"""BTS room multiple-alarm controller simulator and NMC aggregation service"""

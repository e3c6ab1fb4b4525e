"""Controller peripheral models: ADC, data EEPROM, GPIO ports, seven-segment display"""

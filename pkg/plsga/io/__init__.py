"""
Readers and writers of configuration files and run artifacts
"""

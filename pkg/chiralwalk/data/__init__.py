"""Packaged data tables"""

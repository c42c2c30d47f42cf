"""Scenario runners"""

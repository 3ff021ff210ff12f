#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for `kiara_plugin.vstates` package."""

import pytest  # noqa

import kiara_plugin.vstates


def test_assert():

    assert kiara_plugin.vstates.get_version() is not None

# -*- coding: utf-8 -*-
from kiara.models.values.value import Value


def check_report_rows(report: Value):

    data = report.data.dict_data
    assert data["p"] == 2
    assert len(data["rows"]) == 12
    assert {row["status"] for row in data["rows"]} == {"match"}

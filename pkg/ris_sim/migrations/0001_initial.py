# Generated by Django 4.2.11

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('preset', models.CharField(max_length=200)),
                ('strategy', models.CharField(max_length=200)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('output_dir', models.CharField(max_length=500)),
                ('delta_r_db', models.FloatField()),
                ('r_bar_db', models.FloatField()),
                ('manifest', models.JSONField(default=dict)),
                ('created', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created', '-id'],
            },
        ),
    ]
